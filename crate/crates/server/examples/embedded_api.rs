//! Mounts the HTTP API in process and talks to it without opening a
//! socket. Useful as a template for embedding the router in a larger axum
//! application.

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request};
use etable_core::fixtures::academic_graph;
use etable_server::{app, ServerConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(router: &axum::Router, method: Method, uri: &str, body: Value) -> Value {
    let body = if body.is_null() { Body::empty() } else { Body::from(body.to_string()) };
    let req =
        Request::builder().method(&method).uri(uri).header("content-type", "application/json").body(body).unwrap();
    let resp = router.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value: Value = serde_json::from_slice(&bytes).unwrap();
    println!("{method} {uri} -> {status}");
    value
}

#[tokio::main]
async fn main() {
    let (_, router) = app(Arc::new(academic_graph()), &ServerConfig::new("in-memory"));

    let schema = call(&router, Method::GET, "/schema", Value::Null).await;
    println!("  node counts {}", schema["node_counts"]);

    let id = call(&router, Method::POST, "/sessions", Value::Null).await["id"].as_str().unwrap().to_string();
    let actions = format!("/sessions/{id}/actions");
    call(&router, Method::POST, &actions, json!({"kind": "Open", "args": {"node_type": "Keywords"}})).await;
    let sorted = call(
        &router,
        Method::POST,
        &actions,
        json!({"kind": "Sort", "args": {"column": "nbr:mv:Paper_keywords:rev", "direction": "desc"}}),
    )
    .await;
    for row in sorted["page"]["rows"].as_array().unwrap().iter().take(3) {
        println!(
            "  {:<24} {} papers",
            row["label"].as_str().unwrap(),
            row["cells"]["nbr:mv:Paper_keywords:rev"]["count"]
        );
    }

    let bad = call(&router, Method::POST, &actions, json!({"kind": "Pivot", "args": {"column": "attr:keyword"}})).await;
    println!("  {} ({})", bad["code"], bad["message"]);

    let sql = call(&router, Method::GET, &format!("/sessions/{id}/sql"), Value::Null).await;
    println!("{}", sql["statement"].as_str().unwrap());
}
