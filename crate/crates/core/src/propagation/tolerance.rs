//! How far a task can move before a downstream objective fails.

use serde::Serialize;

use super::{Assignment, Engine, PropagationError, Scenario};
use crate::model::{GoalGraph, TaskState};

/// Points in the initial scan over the variable's metric domain (both ends
/// included).
pub const TOLERANCE_GRID_POINTS: usize = 1000;

/// Bisection stops once the bracket is this fraction of the domain width.
const REFINE_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToleranceSlack {
    /// NFR-valued task: the satisfied interval of its level.
    Interval {
        /// `None` when no scanned level satisfies every monitored objective.
        lower: Option<f64>,
        upper: Option<f64>,
        satisfiable: bool,
        /// Whether the scenario's own level lies inside the interval.
        contains_current: bool,
        monitored: Vec<String>,
    },
    /// Functional task: the states that keep every monitored objective met.
    States {
        states: Vec<TaskState>,
        satisfiable: bool,
        monitored: Vec<String>,
    },
}

/// Slack of `variable` with respect to `objective_goal` and every other
/// objective downstream of the variable.
pub fn tolerance_slack(
    graph: &GoalGraph,
    scenario: &Scenario,
    variable: &str,
    objective_goal: &str,
) -> Result<ToleranceSlack, PropagationError> {
    let task = graph
        .node(variable)
        .ok_or_else(|| PropagationError::UnknownNode(variable.to_string()))?;
    if !task.is_task() {
        return Err(PropagationError::NotATask(variable.to_string()));
    }
    let goal = graph
        .node(objective_goal)
        .ok_or_else(|| PropagationError::UnknownNode(objective_goal.to_string()))?;
    if goal.required_magnitude().is_none() {
        return Err(PropagationError::NotAnObjective(objective_goal.to_string()));
    }
    let downstream = graph.descendants(variable);
    if !downstream.iter().any(|id| id == objective_goal) {
        return Err(PropagationError::NotDownstream {
            task: variable.to_string(),
            goal: objective_goal.to_string(),
        });
    }
    let monitored: Vec<String> = downstream
        .into_iter()
        .filter(|id| graph.node(id).is_some_and(|n| n.required_magnitude().is_some()))
        .collect();

    scenario.check(graph)?;
    let engine = Engine::new(graph)?;
    let holds = |value: Assignment| -> Result<bool, PropagationError> {
        let mut s = scenario.clone();
        s.assign(graph, variable, value)?;
        let r = engine.propagate(&s)?;
        Ok(monitored.iter().all(|id| r.satisfied(id) == Some(true)))
    };

    if task.is_functional_task() {
        let mut states = Vec::new();
        for st in TaskState::ALL {
            if holds(Assignment::State(st))? {
                states.push(st);
            }
        }
        return Ok(ToleranceSlack::States {
            satisfiable: !states.is_empty(),
            states,
            monitored,
        });
    }

    let metric = graph
        .node_metric(task)
        .ok_or_else(|| PropagationError::MissingMetric(variable.to_string()))?;
    let (min, width) = (metric.domain_min, metric.width());
    let level_at = |i: usize| {
        if i + 1 == TOLERANCE_GRID_POINTS {
            metric.domain_max
        } else {
            min + width * (i as f64) / ((TOLERANCE_GRID_POINTS - 1) as f64)
        }
    };
    let sat_at = |x: f64| holds(Assignment::Level(x));
    let grid: Vec<bool> = (0..TOLERANCE_GRID_POINTS)
        .map(|i| sat_at(level_at(i)))
        .collect::<Result<_, _>>()?;

    // maximal runs of satisfied grid points
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if grid[i] {
            let start = i;
            while i + 1 < grid.len() && grid[i + 1] {
                i += 1;
            }
            runs.push((start, i));
        }
        i += 1;
    }
    let Some(&first) = runs.first() else {
        return Ok(ToleranceSlack::Interval {
            lower: None,
            upper: None,
            satisfiable: false,
            contains_current: false,
            monitored,
        });
    };
    let current = scenario.task_levels.get(variable).copied();
    let containing = current.and_then(|x| {
        runs.iter()
            .copied()
            .find(|&(a, b)| x >= level_at(a.saturating_sub(1)) && x <= level_at((b + 1).min(grid.len() - 1)))
            .filter(|_| sat_at(x).unwrap_or(false))
    });
    let (a, b) = containing.unwrap_or_else(|| {
        runs.iter()
            .copied()
            .fold(first, |best, r| if r.1 - r.0 > best.1 - best.0 { r } else { best })
    });

    let tol = REFINE_FRACTION * width;
    let refine = |mut sat: f64, mut unsat: f64| -> Result<f64, PropagationError> {
        while (sat - unsat).abs() > tol {
            let mid = 0.5 * (sat + unsat);
            if sat_at(mid)? {
                sat = mid;
            } else {
                unsat = mid;
            }
        }
        Ok(sat)
    };
    let lower = if a == 0 {
        metric.domain_min
    } else {
        refine(level_at(a), level_at(a - 1))?
    };
    let upper = if b + 1 == grid.len() {
        metric.domain_max
    } else {
        refine(level_at(b), level_at(b + 1))?
    };
    Ok(ToleranceSlack::Interval {
        lower: Some(lower),
        upper: Some(upper),
        satisfiable: true,
        contains_current: current.is_some_and(|x| x >= lower && x <= upper),
        monitored,
    })
}
