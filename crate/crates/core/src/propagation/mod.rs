//! Scenario evaluation over goal graphs.
//!
//! Contribution functions are interpolated piecewise-linearly and evaluated
//! in topological order, from tasks up to root goals. Deltas are additive
//! against each goal's per-profile baseline, so the all-As-Is scenario
//! reproduces the baselines.

mod analysis;
mod engine;
mod scenario;
mod tolerance;

pub use analysis::{benefit_delta, whatif_diff, BenefitDelta, LevelDelta, NodeDiff, WhatIf};
pub use engine::{
    aggregate_parent, eval_link, eval_samples, propagate, satisfaction, Aggregated, Engine, Inbound, LinkEval,
    NodeResult, PropagationResult,
};
pub use scenario::{Assignment, Scenario};
pub use tolerance::{tolerance_slack, ToleranceSlack, TOLERANCE_GRID_POINTS};

use crate::model::TaskState;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PropagationError {
    #[error("unknown usage profile `{0}`")]
    UnknownProfile(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("`{0}` is not a task")]
    NotATask(String),
    #[error("task `{0}` has no assignment in the scenario")]
    MissingAssignment(String),
    #[error("task `{0}` is assigned more than once")]
    DuplicateAssignment(String),
    #[error("task `{task}` takes {expected}, got {got}")]
    WrongAssignment {
        task: String,
        expected: &'static str,
        got: String,
    },
    #[error("level {level} for `{node}` is outside its metric domain [{min}, {max}]")]
    LevelOutOfDomain {
        node: String,
        level: f64,
        min: f64,
        max: f64,
    },
    #[error("node `{node}` has no baseline for profile `{profile}`")]
    MissingBaseline { node: String, profile: String },
    #[error("node `{0}` has no usable metric")]
    MissingMetric(String),
    #[error("link `{link}` has no samples for profile `{profile}`")]
    MissingProfileSamples { link: String, profile: String },
    #[error("link `{link}` has no sample for state {}", state.as_str())]
    MissingState { link: String, state: TaskState },
    #[error("link `{link}`: {reason}")]
    InvalidLink { link: String, reason: String },
    #[error("the contribution links contain a cycle")]
    Cycle,
    #[error("task `{0}` is not functional (it has a metric)")]
    NotFunctional(String),
    #[error("goal `{0}` carries no quantified objective")]
    NotAnObjective(String),
    #[error("`{goal}` is not downstream of `{task}`")]
    NotDownstream { task: String, goal: String },
}

impl PropagationError {
    /// Errors about values outside admissible domains, as opposed to
    /// malformed or unknown scenario input.
    pub fn is_domain_violation(&self) -> bool {
        matches!(self, PropagationError::LevelOutOfDomain { .. })
    }
}
