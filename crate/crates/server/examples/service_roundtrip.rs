//! Drives the HTTP API in-process: list, run, poll, submit, history.
//!
//! ```text
//! cargo run -p virtlab-server --example service_roundtrip
//! ```

use std::path::Path;
use std::time::Duration;

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use virtlab::bundled::Controller;
use virtlab_server::{App, ServiceConfig};

async fn call(app: &Router, req: Request<Body>) -> (u16, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status().as_u16();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

fn post(uri: &str, source: &str) -> Request<Body> {
    Request::post(uri).body(Body::from(source.to_string())).unwrap()
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

#[tokio::main]
async fn main() {
    let data = tempfile::tempdir().unwrap();
    let assignments = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/assets/assignments");
    let app = App::new(&ServiceConfig::new(assignments, data.path())).unwrap().router();

    let (_, list) = call(&app, get("/api/assignments")).await;
    println!("assignments: {list}");

    let (status, job) = call(&app, post("/api/assignments/w1-square/run", Controller::BugFollower.source())).await;
    println!("run -> {status} {}", job["status"]);
    let uri = format!("/api/runs/{}", job["id"].as_str().unwrap());
    let done = loop {
        let (_, job) = call(&app, get(&uri)).await;
        if job["status"] != "queued" && job["status"] != "running" {
            break job;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    };
    let r = &done["result"];
    println!(
        "{}: {} after {} ticks, score preview {}, {} frames (stride {})",
        done["status"],
        r["termination"],
        r["ticks"],
        r["score_preview"],
        r["frames"].as_array().unwrap().len(),
        r["frame_stride"]
    );

    let (status, err) = call(&app, post("/api/assignments/w1-square/run", "tick { drive(1, ) }")).await;
    println!("bad source -> {status} {}", err["message"]);

    for c in [Controller::Starter, Controller::BugFollower] {
        let (status, sub) = call(&app, post("/api/assignments/w1-square/submit", c.source())).await;
        println!("submit {c:?} -> {status} score {}", sub["report"]["score"]);
    }
    let (_, history) = call(&app, get("/api/submissions?assignment=w1-square")).await;
    for s in history.as_array().unwrap() {
        println!("  {} {} {}", s["created_at"], s["id"], s["report"]["score"]);
    }
}
