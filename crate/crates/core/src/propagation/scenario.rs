use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PropagationError;
use crate::model::{GoalGraph, TaskState};

/// A value for one task: a state for functional tasks, a level otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Assignment {
    State(TaskState),
    Level(f64),
}

impl FromStr for Assignment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(state) = s.parse::<TaskState>() {
            return Ok(Assignment::State(state));
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Assignment::Level(x)),
            _ => Err(format!("`{s}` is neither AsIs, ToBe nor a finite number")),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assignment::State(s) => f.write_str(s.as_str()),
            Assignment::Level(x) => write!(f, "{x}"),
        }
    }
}

/// Task states and levels under one usage profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub profile: String,
    #[serde(default)]
    pub task_states: BTreeMap<String, TaskState>,
    #[serde(default)]
    pub task_levels: BTreeMap<String, f64>,
}

impl Scenario {
    /// Every functional task As-Is and every NFR task at its baseline.
    pub fn as_is(graph: &GoalGraph, profile: &str) -> Result<Self, PropagationError> {
        if !graph.has_profile(profile) {
            return Err(PropagationError::UnknownProfile(profile.to_string()));
        }
        let mut scenario = Scenario {
            profile: profile.to_string(),
            task_states: BTreeMap::new(),
            task_levels: BTreeMap::new(),
        };
        for task in graph.nodes.iter().filter(|n| n.is_task()) {
            if task.is_functional_task() {
                scenario.task_states.insert(task.id.clone(), TaskState::AsIs);
            } else {
                let level = task.baseline.get(profile).copied().ok_or_else(|| {
                    PropagationError::MissingBaseline {
                        node: task.id.clone(),
                        profile: profile.to_string(),
                    }
                })?;
                scenario.task_levels.insert(task.id.clone(), level);
            }
        }
        Ok(scenario)
    }

    /// The As-Is scenario with `assignments` applied on top.
    pub fn from_assignments(
        graph: &GoalGraph,
        profile: &str,
        assignments: &BTreeMap<String, Assignment>,
    ) -> Result<Self, PropagationError> {
        let mut scenario = Self::as_is(graph, profile)?;
        for (task, value) in assignments {
            scenario.assign(graph, task, *value)?;
        }
        scenario.check(graph)?;
        Ok(scenario)
    }

    /// Set one task, checking that the kind of value matches the task.
    pub fn assign(&mut self, graph: &GoalGraph, task: &str, value: Assignment) -> Result<(), PropagationError> {
        let node = graph
            .node(task)
            .ok_or_else(|| PropagationError::UnknownNode(task.to_string()))?;
        if !node.is_task() {
            return Err(PropagationError::NotATask(task.to_string()));
        }
        match (node.is_functional_task(), value) {
            (true, Assignment::State(s)) => {
                self.task_states.insert(task.to_string(), s);
                self.task_levels.remove(task);
            }
            (false, Assignment::Level(x)) => {
                self.task_levels.insert(task.to_string(), x);
                self.task_states.remove(task);
            }
            (functional, got) => {
                return Err(PropagationError::WrongAssignment {
                    task: task.to_string(),
                    expected: if functional { "a state (AsIs/ToBe)" } else { "a level" },
                    got: got.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Every task assigned exactly once, with the right kind of value, and
    /// levels inside metric domains.
    pub fn check(&self, graph: &GoalGraph) -> Result<(), PropagationError> {
        if !graph.has_profile(&self.profile) {
            return Err(PropagationError::UnknownProfile(self.profile.clone()));
        }
        for id in self.task_states.keys().chain(self.task_levels.keys()) {
            let node = graph
                .node(id)
                .ok_or_else(|| PropagationError::UnknownNode(id.clone()))?;
            if !node.is_task() {
                return Err(PropagationError::NotATask(id.clone()));
            }
        }
        for task in graph.nodes.iter().filter(|n| n.is_task()) {
            let state = self.task_states.get(&task.id);
            let level = self.task_levels.get(&task.id);
            match (state, level) {
                (None, None) => return Err(PropagationError::MissingAssignment(task.id.clone())),
                (Some(_), Some(_)) => return Err(PropagationError::DuplicateAssignment(task.id.clone())),
                (Some(s), None) if !task.is_functional_task() => {
                    return Err(PropagationError::WrongAssignment {
                        task: task.id.clone(),
                        expected: "a level",
                        got: s.as_str().to_string(),
                    })
                }
                (None, Some(x)) => {
                    let Some(metric) = graph.node_metric(task) else {
                        return Err(PropagationError::WrongAssignment {
                            task: task.id.clone(),
                            expected: "a state (AsIs/ToBe)",
                            got: x.to_string(),
                        });
                    };
                    if !x.is_finite() || !metric.contains(*x) {
                        return Err(PropagationError::LevelOutOfDomain {
                            node: task.id.clone(),
                            level: *x,
                            min: metric.domain_min,
                            max: metric.domain_max,
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn assignment(&self, task: &str) -> Option<Assignment> {
        self.task_states
            .get(task)
            .map(|s| Assignment::State(*s))
            .or_else(|| self.task_levels.get(task).map(|x| Assignment::Level(*x)))
    }
}
