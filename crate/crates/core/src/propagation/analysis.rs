use std::collections::BTreeMap;

use serde::Serialize;

use super::{Assignment, Engine, PropagationError, PropagationResult, Scenario};
use crate::model::{GoalGraph, TaskState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelDelta {
    pub as_is_level: f64,
    pub to_be_level: f64,
    pub delta: f64,
}

/// The As-Is versus To-Be comparison for one functional task.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenefitDelta {
    pub task: String,
    pub profile: String,
    /// Every node the task contributes to, directly or transitively.
    pub ancestors: BTreeMap<String, LevelDelta>,
}

/// Propagate with `task` As-Is and To-Be (everything else As-Is) and diff
/// the levels of every node the task feeds.
pub fn benefit_delta(graph: &GoalGraph, task: &str, profile: &str) -> Result<BenefitDelta, PropagationError> {
    let node = graph
        .node(task)
        .ok_or_else(|| PropagationError::UnknownNode(task.to_string()))?;
    if !node.is_task() {
        return Err(PropagationError::NotATask(task.to_string()));
    }
    if !node.is_functional_task() {
        return Err(PropagationError::NotFunctional(task.to_string()));
    }
    let engine = Engine::new(graph)?;
    let as_is = Scenario::as_is(graph, profile)?;
    let mut to_be = as_is.clone();
    to_be.assign(graph, task, Assignment::State(TaskState::ToBe))?;
    let before = engine.propagate(&as_is)?;
    let after = engine.propagate(&to_be)?;
    let ancestors = graph
        .descendants(task)
        .into_iter()
        .filter_map(|id| {
            let (a, b) = (before.level(&id)?, after.level(&id)?);
            Some((
                id,
                LevelDelta {
                    as_is_level: a,
                    to_be_level: b,
                    delta: b - a,
                },
            ))
        })
        .collect();
    Ok(BenefitDelta {
        task: task.to_string(),
        profile: profile.to_string(),
        ancestors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeDiff {
    pub before: f64,
    pub after: f64,
    pub delta: f64,
    pub confidence_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhatIf {
    pub base_profile: String,
    pub changed_profile: String,
    /// Set when the two scenarios use different usage profiles.
    pub cross_profile: bool,
    pub nodes: BTreeMap<String, NodeDiff>,
}

fn diff(base: &PropagationResult, changed: &PropagationResult) -> BTreeMap<String, NodeDiff> {
    base.nodes
        .iter()
        .filter_map(|(id, b)| {
            let c = changed.nodes.get(id)?;
            let (before, after) = (b.attained_level?, c.attained_level?);
            Some((
                id.clone(),
                NodeDiff {
                    before,
                    after,
                    delta: after - before,
                    confidence_after: c.confidence,
                },
            ))
        })
        .collect()
}

/// Element-wise difference of two propagations over every node with a level.
pub fn whatif_diff(graph: &GoalGraph, base: &Scenario, changed: &Scenario) -> Result<WhatIf, PropagationError> {
    let engine = Engine::new(graph)?;
    let before = engine.propagate(base)?;
    let after = engine.propagate(changed)?;
    Ok(WhatIf {
        base_profile: base.profile.clone(),
        changed_profile: changed.profile.clone(),
        cross_profile: base.profile != changed.profile,
        nodes: diff(&before, &after),
    })
}
