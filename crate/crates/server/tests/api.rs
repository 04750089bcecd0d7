mod common;

use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use common::*;
use serde_json::{json, Value};
use virtlab::bundled::Controller;
use virtlab_server::ServiceConfig;

const INFINITE: &str = "tick { while true { } }";

#[tokio::test]
async fn lists_bundled_assignments_in_id_order() {
    let data = tempfile::tempdir().unwrap();
    let (status, list) = get(&app(data.path()), "/api/assignments").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        list,
        json!([
            {"id": "w1-square", "title": list[0]["title"]},
            {"id": "w2-wall", "title": list[1]["title"]},
            {"id": "w3-slant", "title": list[2]["title"]},
        ])
    );
}

#[tokio::test]
async fn empty_directory_serves_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(ServiceConfig::new(dir.path(), dir.path().join("data")));
    assert_eq!(get(&app, "/api/assignments").await, (StatusCode::OK, json!([])));
}

#[tokio::test]
async fn malformed_assignment_file_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(bundled_assignments()).unwrap() {
        let p = entry.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        // inline the starter so the copies do not depend on the controllers directory
        let text = text.replace(
            "starter_code = \"../controllers/starter.rbt\"",
            &format!("starter_source = {:?}", Controller::Starter.source()),
        );
        std::fs::write(dir.path().join(p.file_name().unwrap()), text).unwrap();
    }
    std::fs::write(dir.path().join("w0-broken.toml"), "[assignment]\nid = \"broken\"\n").unwrap();
    let app = app_with(ServiceConfig::new(dir.path(), dir.path().join("data")));
    let (_, list) = get(&app, "/api/assignments").await;
    let ids: Vec<&str> = list.as_array().unwrap().iter().map(|a| a["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["w1-square", "w2-wall", "w3-slant"]);
}

#[tokio::test]
async fn assignment_detail_has_world_tests_and_starter() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path());
    let (status, a) = get(&app, "/api/assignments/w1-square").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(a["starter_code"], Controller::Starter.source());
    assert_eq!(a["tests"].as_array().unwrap().len(), 6);
    assert_eq!(a["world"]["obstacle"].as_array().unwrap().len(), 1);
    assert_eq!(a["reference"]["L_total"], 12.0);
    assert_eq!(get(&app, "/api/assignments/nope").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn bundled_solution_run_passes_everything() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path());
    let job = run_to_end(&app, "w1-square", Controller::BugFollower.source()).await;
    assert_eq!(job["status"], "done", "{job}");
    let r = &job["result"];
    assert_eq!(r["score_preview"], 100.0);
    assert_eq!(r["termination"], "goal_reached");
    assert_eq!(r["recorded"], false);
    let flags = pass_flags(r);
    assert_eq!(flags.len(), 6);
    assert!(flags.iter().all(|(_, p)| *p), "{flags:?}");
    let frames = r["frames"].as_array().unwrap();
    assert!(frames.len() <= 2000);
    assert_eq!(frames.last().unwrap()["tick"], r["ticks"]);
    assert_eq!(r["report"]["per_test"].as_array().unwrap().len(), 6);
    // runs are never written to the store
    assert_eq!(get(&app, "/api/submissions?assignment=w1-square").await.1, json!([]));
}

#[tokio::test]
async fn run_feedback_for_drive_straight() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path());
    let job = run_to_end(&app, "w1-square", "tick { drive(1.0, 0.0); }").await;
    let r = &job["result"];
    assert_eq!(r["termination"], "collision");
    let first = &r["results"][0];
    assert_eq!((first["kind"].as_str(), first["passed"].as_bool()), (Some("no_collision"), Some(false)));
    assert!(first["first_violation"]["tick"].as_u64().is_some());
    let hint = r["report"]["per_test"][0]["feedback"]["hint"].as_str().unwrap();
    assert!(hint.starts_with("Your robot hit an obstacle at tick "), "{hint}");
}

#[tokio::test]
async fn unparsable_source_is_422_with_position() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path());
    for uri in ["/api/assignments/w1-square/run", "/api/assignments/w1-square/submit"] {
        let (status, body) = post(&app, uri, "tick {\n  drive(1.0, );\n}").await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(body["error"], "parse_error");
        let msg = body["message"].as_str().unwrap();
        let (pos, _) = msg.split_once(": ").unwrap();
        let (line, col) = pos.split_once(':').unwrap();
        assert_eq!(line, "2", "{msg}");
        assert!(col.parse::<u32>().is_ok(), "{msg}");
        assert_eq!(body["errors"][0]["line"], 2);
    }
}

#[tokio::test]
async fn json_body_is_accepted() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path());
    let req = Request::post("/api/assignments/w1-square/run")
        .header("content-type", "application/json")
        .body(Body::from(json!({"source": "tick { drive(0.5, 0.0); }"}).to_string()))
        .unwrap();
    assert_eq!(send(&app, req).await.0, StatusCode::ACCEPTED);
}

#[tokio::test]
async fn oversize_and_unknown_are_rejected() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path());
    let big = format!("tick {{ }}\n{}", "#".repeat(64 * 1024));
    let (status, _) = post(&app, "/api/assignments/w1-square/run", big.clone()).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(post(&app, "/api/assignments/w1-square/submit", big).await.0, StatusCode::PAYLOAD_TOO_LARGE);
    let exactly = format!("tick {{ }}\n{}", "#".repeat(64 * 1024 - 9));
    assert_eq!(exactly.len(), 64 * 1024);
    assert_eq!(post(&app, "/api/assignments/w1-square/run", exactly).await.0, StatusCode::ACCEPTED);
    assert_eq!(post(&app, "/api/assignments/zzz/run", "tick { }").await.0, StatusCode::NOT_FOUND);
    assert_eq!(post(&app, "/api/assignments/zzz/submit", "tick { }").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/runs/not-a-uuid").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/runs/00000000-0000-0000-0000-000000000000").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/submissions?assignment=zzz").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/submissions").await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn infinite_loop_finishes_with_budget_exceeded() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path());
    let started = Instant::now();
    let job = run_to_end(&app, "w1-square", INFINITE).await;
    assert!(started.elapsed() < Duration::from_secs(10));
    assert_eq!(job["status"], "done");
    assert_eq!(job["result"]["termination"], "budget_exceeded");
    let goal = pass_flags(&job["result"]).into_iter().find(|(k, _)| k == "goal_reached").unwrap();
    assert!(!goal.1);
}

#[tokio::test]
async fn wall_clock_cap_fails_slow_runs() {
    let dir = tempfile::tempdir().unwrap();
    // one assignment with a budget big enough that only the wall clock stops it
    let text = std::fs::read_to_string(bundled_assignments().join("w1-square.toml"))
        .unwrap()
        .replace(
            "starter_code = \"../controllers/starter.rbt\"",
            "starter_source = \"tick { }\"",
        );
    let text = format!("{text}\n[sim]\nmax_ticks = 100000000\nstep_budget = 100000000\n");
    std::fs::write(dir.path().join("slow.toml"), text).unwrap();
    let mut config = ServiceConfig::new(dir.path(), dir.path().join("data"));
    config.run_timeout = Duration::from_millis(300);
    let app = app_with(config);
    let (_, list) = get(&app, "/api/assignments").await;
    assert_eq!(list.as_array().unwrap().len(), 1, "{list}");
    let started = Instant::now();
    let job = run_to_end(&app, "w1-square", "tick { let i = 0; while i < 10000000 { i = i + 1; } }").await;
    assert!(started.elapsed() < Duration::from_secs(5));
    assert_eq!(job["status"], "failed", "{job}");
    assert!(job["error"].as_str().unwrap().contains("wall-clock"));
    let (status, body) = post(&app, "/api/assignments/w1-square/submit", "tick { let i = 0; while i < 10000000 { i = i + 1; } }").await;
    assert_eq!(status, StatusCode::GATEWAY_TIMEOUT, "{body}");
}

#[tokio::test]
async fn repeated_submits_have_distinct_ids_and_equal_scores() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path());
    let src = Controller::LeftTurn.source();
    let (s1, a) = post(&app, "/api/assignments/w1-square/submit", src).await;
    let (s2, b) = post(&app, "/api/assignments/w1-square/submit", src).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_ne!(a["id"], b["id"]);
    assert_eq!(a["report"]["score"], b["report"]["score"]);
    assert_eq!(a["trace_digest"], b["trace_digest"]);
    assert_eq!(a["source"], src);
}

#[tokio::test]
async fn history_is_newest_first_and_survives_restart() {
    let data = tempfile::tempdir().unwrap();
    let sources = ["tick { drive(0.1, 0.0); }", "tick { drive(0.2, 0.0); }", "tick { drive(0.3, 0.0); }"];
    let mut ids = Vec::new();
    {
        let app = app(data.path());
        for s in sources {
            let (status, sub) = post(&app, "/api/assignments/w1-square/submit", s).await;
            assert_eq!(status, StatusCode::OK);
            ids.push(sub["id"].clone());
        }
        let (_, other) = post(&app, "/api/assignments/w2-wall/submit", sources[0]).await;
        assert_eq!(other["assignment_id"], "w2-wall");
    }
    // a fresh process over the same data directory
    let app = app(data.path());
    let (status, history) = get(&app, "/api/submissions?assignment=w1-square").await;
    assert_eq!(status, StatusCode::OK);
    let got: Vec<Value> = history.as_array().unwrap().iter().map(|s| s["id"].clone()).collect();
    ids.reverse();
    assert_eq!(got, ids);
    assert_eq!(history[0]["source"], sources[2]);
    let (_, w2) = get(&app, "/api/submissions?assignment=w2-wall").await;
    assert_eq!(w2.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn unwritable_store_is_503_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::write(&data, b"occupied").unwrap();
    let app = app(&data);
    let (status, body) = post(&app, "/api/assignments/w1-square/submit", Controller::BugFollower.source()).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE, "{body}");
    assert_eq!(body["error"], "store_unavailable");
    assert_eq!(std::fs::read(&data).unwrap(), b"occupied");
    // runs do not touch the store and keep working
    assert_eq!(run_to_end(&app, "w1-square", "tick { }").await["status"], "done");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_runs_match_sequential() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path());
    let programs: Vec<&str> = [Controller::BugFollower, Controller::Freeze, Controller::BangBang, Controller::Wanderer]
        .iter()
        .map(|c| c.source())
        .chain(["tick { drive(1.0, 0.3); }", INFINITE])
        .collect();
    let key = |job: &Value| (job["result"]["trace_digest"].clone(), job["result"]["results"].clone());
    let mut sequential = Vec::new();
    for p in &programs {
        sequential.push(key(&run_to_end(&app, "w2-wall", p).await));
    }
    let handles: Vec<_> = programs
        .iter()
        .map(|p| {
            let (app, p) = (app.clone(), p.to_string());
            tokio::spawn(async move { run_to_end(&app, "w2-wall", &p).await })
        })
        .collect();
    for (h, expected) in handles.into_iter().zip(&sequential) {
        assert_eq!(&key(&h.await.unwrap()), expected);
    }
}
