//! Read-only JSON service over one loaded model.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use goalbench_core::layout::LayoutOptions;
use goalbench_core::model::GoalGraph;

use crate::api::{self, ApiError, ErrorClass, MonteCarloRequest, ScenarioRequest, WhatIfRequest};

struct AppState {
    graph: GoalGraph,
    model: String,
    layout: String,
}

type Shared = Arc<AppState>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.class {
            ErrorClass::BadRequest => StatusCode::BAD_REQUEST,
            ErrorClass::Unprocessable => StatusCode::UNPROCESSABLE_ENTITY,
        };
        (status, [(header::CONTENT_TYPE, "application/json")], self.body()).into_response()
    }
}

fn json(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

type Reply = Result<Response, ApiError>;

async fn get_model(State(s): State<Shared>) -> Response {
    json(s.model.clone())
}

async fn get_layout(State(s): State<Shared>) -> Response {
    json(s.layout.clone())
}

async fn post_propagate(State(s): State<Shared>, body: Bytes) -> Reply {
    let req: ScenarioRequest = api::parse_body(&body)?;
    Ok(json(api::propagate_scenario(&s.graph, &req)?))
}

async fn post_whatif(State(s): State<Shared>, body: Bytes) -> Reply {
    let req: WhatIfRequest = api::parse_body(&body)?;
    Ok(json(api::whatif(&s.graph, &req)?))
}

async fn post_montecarlo(State(s): State<Shared>, body: Bytes) -> Reply {
    let req: MonteCarloRequest = api::parse_body(&body)?;
    let text = tokio::task::spawn_blocking(move || api::montecarlo(&s.graph, &req))
        .await
        .map_err(|e| ApiError::bad_request("internal", e.to_string()))??;
    Ok(json(text))
}

fn number_param(params: &HashMap<String, String>, name: &str) -> Result<Option<f64>, ApiError> {
    params
        .get(name)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| ApiError::bad_request("invalid_request", format!("`{name}` must be a number, got `{v}`")))
        })
        .transpose()
}

async fn get_duplicates(State(s): State<Shared>, Query(params): Query<HashMap<String, String>>) -> Reply {
    let threshold = number_param(&params, "threshold")?;
    Ok(json(api::duplicates(std::slice::from_ref(&s.graph), threshold)?))
}

async fn get_utility(State(s): State<Shared>, Query(params): Query<HashMap<String, String>>) -> Reply {
    let req = ScenarioRequest {
        profile: params.get("profile").filter(|p| !p.is_empty()).cloned(),
        assignments: api::parse_assignment_list(params.get("assignments").map_or("", String::as_str))?,
    };
    let threshold = number_param(&params, "threshold")?;
    Ok(json(api::utility(&s.graph, &req, None, threshold)?))
}

async fn not_found() -> Response {
    let body = ApiError::bad_request("not_found", "no such endpoint").body();
    (StatusCode::NOT_FOUND, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

/// Routes over a validated graph. The model and layout documents are
/// rendered once up front since the graph never changes.
pub fn router(graph: GoalGraph) -> Result<Router, ApiError> {
    let state = Arc::new(AppState {
        model: api::model(&graph),
        layout: api::layout_json(&graph, &LayoutOptions::default())?,
        graph,
    });
    Ok(Router::new()
        .route("/api/model", get(get_model))
        .route("/api/layout", get(get_layout))
        .route("/api/propagate", post(post_propagate))
        .route("/api/whatif", post(post_whatif))
        .route("/api/montecarlo", post(post_montecarlo))
        .route("/api/duplicates", get(get_duplicates))
        .route("/api/utility", get(get_utility))
        .fallback(not_found)
        .with_state(state))
}

/// Serve until Ctrl-C.
pub async fn serve(graph: GoalGraph, bind: SocketAddr) -> std::io::Result<()> {
    let app = router(graph).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(bind).await?;
    eprintln!("goalbench listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

pub fn serve_blocking(graph: GoalGraph, bind: SocketAddr) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(graph, bind))
}
