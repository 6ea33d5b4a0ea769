use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use goalbench::server::router;
use goalbench_core::fixtures;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

fn app() -> Router {
    router(fixtures::signage()).unwrap()
}

async fn call(app: Router, method: &str, uri: &str, body: &str) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn get(uri: &str) -> (StatusCode, String) {
    call(app(), "GET", uri, "").await
}

async fn post(uri: &str, body: &str) -> (StatusCode, String) {
    call(app(), "POST", uri, body).await
}

fn parse(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[tokio::test]
async fn propagate_to_be() {
    let (status, body) = post("/api/propagate", r#"{"profile": "Normal", "assignments": {"T1": "ToBe"}}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.contains(r#""G2": {"attained_level": 82"#), "{body}");
    let v = parse(&body);
    assert_eq!(v["nodes"]["G2"]["satisfied"], true);
    assert_eq!(v["nodes"]["G1"]["attained_level"], 2);
}

#[tokio::test]
async fn propagate_defaults_to_as_is_and_default_profile() {
    let (status, body) = post("/api/propagate", "{}").await;
    assert_eq!(status, StatusCode::OK);
    let v = parse(&body);
    assert_eq!(v["profile"], "Normal");
    assert_eq!(v["nodes"]["G2"]["attained_level"], 100);
}

#[tokio::test]
async fn model_is_byte_stable() {
    let (s1, a) = get("/api/model").await;
    let (s2, b) = get("/api/model").await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(a, b);
    assert_eq!(a, goalbench_core::serialize_model(&fixtures::signage()));
}

#[tokio::test]
async fn layout_lists_every_node() {
    let (status, body) = get("/api/layout").await;
    assert_eq!(status, StatusCode::OK);
    let v = parse(&body);
    let ids: Vec<&str> = v["nodes"].as_array().unwrap().iter().map(|n| n["id"].as_str().unwrap()).collect();
    for id in ["T1", "G1", "G2", "G4"] {
        assert!(ids.contains(&id));
    }
}

#[tokio::test]
async fn unknown_task_is_400() {
    let (status, body) = post("/api/propagate", r#"{"assignments": {"T9": "ToBe"}}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v = parse(&body);
    assert_eq!(v["error"]["kind"], "invalid_scenario");
    assert!(v["error"]["message"].as_str().unwrap().contains("T9"));
}

#[tokio::test]
async fn malformed_bodies_are_400() {
    for body in ["{", r#"{"assignments": {"T1": "Maybe"}}"#, r#"{"profle": "Normal"}"#, r#"{"profile": "Winter"}"#] {
        let (status, text) = post("/api/propagate", body).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}: {text}");
        assert!(parse(&text)["error"]["kind"].is_string());
    }
}

#[tokio::test]
async fn out_of_domain_level_is_422() {
    let app = router(fixtures::signage_nfr()).unwrap();
    let (status, body) = call(app, "POST", "/api/propagate", r#"{"assignments": {"T1nfr": 80}}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    assert_eq!(parse(&body)["error"]["kind"], "domain_violation");
}

#[tokio::test]
async fn whatif_round_trip() {
    let same = r#"{"base": {"assignments": {"T1": "ToBe"}}, "changed": {"assignments": {"T1": "ToBe"}}}"#;
    let (status, body) = post("/api/whatif", same).await;
    assert_eq!(status, StatusCode::OK);
    for (_, d) in parse(&body)["nodes"].as_object().unwrap() {
        assert_eq!(d["delta"], 0);
    }
    let cross = r#"{"base": {"profile": "Normal", "assignments": {"T1": "ToBe"}},
                    "changed": {"profile": "Promo", "assignments": {"T1": "ToBe"}}}"#;
    let (_, body) = post("/api/whatif", cross).await;
    let v = parse(&body);
    assert_eq!(v["cross_profile"], true);
    assert_eq!(v["nodes"]["G1"]["delta"], 3);
    assert_eq!(v["nodes"]["G1"]["after"], 5);
}

#[tokio::test]
async fn montecarlo_is_deterministic() {
    let app = router(fixtures::signage_triangular()).unwrap();
    let body = r#"{"assignments": {"T1": "ToBe"}, "runs": 2000, "seed": 9}"#;
    let (s1, a) = call(app.clone(), "POST", "/api/montecarlo", body).await;
    let (s2, b) = call(app, "POST", "/api/montecarlo", body).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(a, b);
    let v = parse(&a);
    assert_eq!(v["runs"], 2000);
    let p = v["nodes"]["G2"]["p_satisfied"].as_f64().unwrap();
    assert!(p > 0.0 && p < 1.0);
}

#[tokio::test]
async fn montecarlo_rejects_zero_runs() {
    let (status, _) = post("/api/montecarlo", r#"{"runs": 0}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn utility_query() {
    let (status, body) = get("/api/utility?profile=Normal&assignments=T1=ToBe").await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let v = parse(&body);
    assert!((v["utility"]["aggregate"].as_f64().unwrap() - 0.69).abs() < 1e-9);
    assert!((v["utility"]["per_stakeholder"]["S1"].as_f64().unwrap() - 0.6125).abs() < 1e-9);
    let (_, body) = get("/api/utility").await;
    assert!((parse(&body)["utility"]["aggregate"].as_f64().unwrap() - 0.6).abs() < 1e-9);
    let (status, _) = get("/api/utility?assignments=T1").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn duplicates_query() {
    let (status, body) = get("/api/duplicates").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "[]\n");
    let (status, body) = get("/api/duplicates?threshold=0.3").await;
    assert_eq!(status, StatusCode::OK);
    assert!(!parse(&body).as_array().unwrap().is_empty(), "{body}");
    for bad in ["0", "1.5", "abc"] {
        let (status, _) = get(&format!("/api/duplicates?threshold={bad}")).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
    }
}

#[tokio::test]
async fn unknown_route_is_json_404() {
    let (status, body) = get("/api/nothing").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(parse(&body)["error"]["kind"], "not_found");
}

#[tokio::test]
async fn concurrent_requests_agree() {
    let app = app();
    let body = r#"{"assignments": {"T1": "ToBe"}}"#;
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { call(app, "POST", "/api/propagate", body).await })
        })
        .collect();
    let mut outs = Vec::new();
    for h in handles {
        outs.push(h.await.unwrap().1);
    }
    assert!(outs.windows(2).all(|w| w[0] == w[1]));
}
