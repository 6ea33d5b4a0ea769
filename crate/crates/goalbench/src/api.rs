//! Request handling shared by the CLI and the HTTP service.
//!
//! Every operation takes the loaded graph plus a request and returns the
//! canonical JSON text of its report.

use std::collections::BTreeMap;

use goalbench_core::canonical::to_canonical_string;
use goalbench_core::layout::{layout_goal_graph, LayoutError, LayoutOptions};
use goalbench_core::model::{serialize_model, GoalGraph};
use goalbench_core::propagation::{
    benefit_delta, propagate, tolerance_slack, whatif_diff, Assignment, PropagationError, Scenario,
};
use goalbench_core::reuse::{find_duplicates, ReuseError, DEFAULT_DUPLICATE_THRESHOLD};
use goalbench_core::uncertainty::{monte_carlo, UncertaintyError};
use goalbench_core::valuation::{disagreement_report, scenario_utility, ValuationError, DEFAULT_CONFLICT_THRESHOLD};
use serde::{Deserialize, Serialize};

pub const DEFAULT_RUNS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 42;
/// Upper bound on Monte-Carlo runs per request.
pub const MAX_RUNS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input or references to things the model does not have.
    BadRequest,
    /// Well-formed input with values outside admissible domains.
    Unprocessable,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub class: ErrorClass,
    pub kind: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::BadRequest,
            kind,
            message: message.into(),
        }
    }

    pub fn unprocessable(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::Unprocessable,
            kind,
            message: message.into(),
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}` in canonical layout.
    pub fn body(&self) -> String {
        #[derive(Serialize)]
        struct Inner<'a> {
            kind: &'a str,
            message: &'a str,
        }
        #[derive(Serialize)]
        struct Body<'a> {
            error: Inner<'a>,
        }
        to_canonical_string(&Body {
            error: Inner {
                kind: self.kind,
                message: &self.message,
            },
        })
    }
}

impl From<PropagationError> for ApiError {
    fn from(e: PropagationError) -> Self {
        if e.is_domain_violation() {
            ApiError::unprocessable("domain_violation", e.to_string())
        } else {
            ApiError::bad_request("invalid_scenario", e.to_string())
        }
    }
}

impl From<ValuationError> for ApiError {
    fn from(e: ValuationError) -> Self {
        match e {
            ValuationError::Propagation(p) => p.into(),
            ValuationError::LevelOutOfDomain { .. } => ApiError::unprocessable("domain_violation", e.to_string()),
            other => ApiError::bad_request("invalid_valuation", other.to_string()),
        }
    }
}

impl From<UncertaintyError> for ApiError {
    fn from(e: UncertaintyError) -> Self {
        match e {
            UncertaintyError::Propagation(p) => p.into(),
            UncertaintyError::Run { source, .. } => source.into(),
            other => ApiError::bad_request("invalid_estimate", other.to_string()),
        }
    }
}

impl From<ReuseError> for ApiError {
    fn from(e: ReuseError) -> Self {
        ApiError::bad_request("invalid_request", e.to_string())
    }
}

impl From<LayoutError> for ApiError {
    fn from(e: LayoutError) -> Self {
        ApiError::bad_request("invalid_layout", e.to_string())
    }
}

/// A profile (default: the model's default profile) plus task assignments
/// applied on top of the As-Is scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRequest {
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default)]
    pub assignments: BTreeMap<String, Assignment>,
}

impl ScenarioRequest {
    pub fn resolve(&self, graph: &GoalGraph) -> Result<Scenario, ApiError> {
        let profile = self.profile.as_deref().unwrap_or_else(|| graph.default_profile());
        Ok(Scenario::from_assignments(graph, profile, &self.assignments)?)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub base: ScenarioRequest,
    pub changed: ScenarioRequest,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloRequest {
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default)]
    pub assignments: BTreeMap<String, Assignment>,
    #[serde(default)]
    pub runs: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Parse a JSON request body, reporting syntax and shape errors as 400s.
pub fn parse_body<'a, T: Deserialize<'a>>(body: &'a [u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_json", e.to_string()))
}

/// Parse `T1=ToBe,T2=3.5` (empty string for none).
pub fn parse_assignment_list(text: &str) -> Result<BTreeMap<String, Assignment>, ApiError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| parse_assignment(pair).map_err(|m| ApiError::bad_request("invalid_scenario", m)))
        .collect()
}

/// Parse one `TASK=VALUE` pair.
pub fn parse_assignment(pair: &str) -> Result<(String, Assignment), String> {
    let (task, value) = pair
        .split_once('=')
        .ok_or_else(|| format!("`{pair}` is not of the form TASK=VALUE"))?;
    let task = task.trim();
    if task.is_empty() {
        return Err(format!("`{pair}` has an empty task id"));
    }
    Ok((task.to_string(), value.parse()?))
}

pub fn model(graph: &GoalGraph) -> String {
    serialize_model(graph)
}

pub fn layout_json(graph: &GoalGraph, options: &LayoutOptions) -> Result<String, ApiError> {
    Ok(to_canonical_string(&layout_goal_graph(graph, options)?))
}

pub fn propagate_scenario(graph: &GoalGraph, req: &ScenarioRequest) -> Result<String, ApiError> {
    let scenario = req.resolve(graph)?;
    Ok(to_canonical_string(&propagate(graph, &scenario)?))
}

pub fn whatif(graph: &GoalGraph, req: &WhatIfRequest) -> Result<String, ApiError> {
    let base = req.base.resolve(graph)?;
    let changed = req.changed.resolve(graph)?;
    Ok(to_canonical_string(&whatif_diff(graph, &base, &changed)?))
}

pub fn benefit(graph: &GoalGraph, task: &str, profile: Option<&str>) -> Result<String, ApiError> {
    let profile = profile.unwrap_or_else(|| graph.default_profile());
    Ok(to_canonical_string(&benefit_delta(graph, task, profile)?))
}

pub fn tolerance(graph: &GoalGraph, req: &ScenarioRequest, task: &str, objective: &str) -> Result<String, ApiError> {
    let scenario = req.resolve(graph)?;
    Ok(to_canonical_string(&tolerance_slack(graph, &scenario, task, objective)?))
}

pub fn montecarlo(graph: &GoalGraph, req: &MonteCarloRequest) -> Result<String, ApiError> {
    let runs = req.runs.unwrap_or(DEFAULT_RUNS);
    if runs == 0 || runs > MAX_RUNS {
        return Err(ApiError::bad_request(
            "invalid_request",
            format!("runs must be between 1 and {MAX_RUNS}, got {runs}"),
        ));
    }
    let scenario = ScenarioRequest {
        profile: req.profile.clone(),
        assignments: req.assignments.clone(),
    }
    .resolve(graph)?;
    let summary = monte_carlo(graph, &scenario, runs, req.seed.unwrap_or(DEFAULT_SEED))?;
    Ok(to_canonical_string(&summary))
}

pub fn duplicates(graphs: &[GoalGraph], threshold: Option<f64>) -> Result<String, ApiError> {
    let pairs = find_duplicates(graphs, threshold.unwrap_or(DEFAULT_DUPLICATE_THRESHOLD))?;
    Ok(to_canonical_string(&pairs))
}

pub fn utility(
    graph: &GoalGraph,
    req: &ScenarioRequest,
    weights: Option<&BTreeMap<String, f64>>,
    conflict_threshold: Option<f64>,
) -> Result<String, ApiError> {
    let threshold = conflict_threshold.unwrap_or(DEFAULT_CONFLICT_THRESHOLD);
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(ApiError::bad_request(
            "invalid_request",
            format!("conflict threshold must be a non-negative number, got {threshold}"),
        ));
    }
    let scenario = req.resolve(graph)?;
    #[derive(Serialize)]
    struct Report {
        utility: goalbench_core::valuation::ScenarioUtility,
        disagreement: Vec<goalbench_core::valuation::Disagreement>,
    }
    let report = Report {
        utility: scenario_utility(graph, &scenario, weights)?,
        disagreement: disagreement_report(graph, threshold)?,
    };
    Ok(to_canonical_string(&report))
}
