//! In-process service harness.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use virtlab_server::{App, ServiceConfig};

pub fn bundled_assignments() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/assets/assignments")
}

pub fn app(data: &Path) -> Router {
    app_with(ServiceConfig::new(bundled_assignments(), data))
}

pub fn app_with(config: ServiceConfig) -> Router {
    App::new(&config).expect("assignments dir readable").router()
}

pub async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.expect("infallible");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub async fn post(app: &Router, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let req = Request::post(uri).header("content-type", "text/plain").body(body.into()).unwrap();
    send(app, req).await
}

/// Starts a run and polls until it leaves queued/running.
pub async fn run_to_end(app: &Router, assignment: &str, source: &str) -> Value {
    let (status, job) = post(app, &format!("/api/assignments/{assignment}/run"), source.to_string()).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{job}");
    let id = job["id"].as_str().unwrap().to_string();
    for _ in 0..3000 {
        let (status, job) = get(app, &format!("/api/runs/{id}")).await;
        assert_eq!(status, StatusCode::OK);
        match job["status"].as_str().unwrap() {
            "queued" | "running" => tokio::time::sleep(Duration::from_millis(10)).await,
            _ => return job,
        }
    }
    panic!("run {id} never finished");
}

pub fn pass_flags(result: &Value) -> Vec<(String, bool)> {
    result["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["kind"].as_str().unwrap().to_string(), r["passed"].as_bool().unwrap()))
        .collect()
}
