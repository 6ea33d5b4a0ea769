use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::uncertainty::Estimate;
use crate::valuation::UtilityFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Ratio,
    Interval,
    Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

/// A measurement scale for goal and task levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metric {
    pub id: String,
    pub name: String,
    pub unit: String,
    pub scale: Scale,
    pub domain_min: f64,
    pub domain_max: f64,
    pub direction: Direction,
    /// For percentage units: the metric the percentage is taken of.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
}

impl Metric {
    pub fn width(&self) -> f64 {
        self.domain_max - self.domain_min
    }

    pub fn contains(&self, level: f64) -> bool {
        level >= self.domain_min && level <= self.domain_max
    }

    pub fn clamp(&self, level: f64) -> f64 {
        level.clamp(self.domain_min, self.domain_max)
    }

    /// Whether `level` meets `magnitude` in this metric's direction.
    pub fn meets(&self, level: f64, magnitude: f64) -> bool {
        match self.direction {
            Direction::Maximize => level >= magnitude,
            Direction::Minimize => level <= magnitude,
        }
    }

    /// Whether the unit is a bare percentage.
    pub fn is_percent(&self) -> bool {
        let unit = self.unit.trim();
        unit == "%" || unit.eq_ignore_ascii_case("percent")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UsageProfile {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stakeholder {
    pub id: String,
    pub name: String,
}

/// A business objective in GQM+Strategies form. Attaching one to a goal
/// makes it a hard goal with a required magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Objective {
    pub activity: String,
    /// Metric id the objective is measured on.
    pub focus: String,
    /// Required level in the focus metric's unit. `None` is an
    /// unquantified objective and fails validation.
    pub magnitude: Option<f64>,
    pub timeframe: String,
    pub scope: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ObjectiveError {
    #[error("unknown focus metric `{0}`")]
    UnknownMetric(String),
    #[error("magnitude {magnitude} is outside the domain [{min}, {max}] of metric `{metric}`")]
    OutOfDomain {
        metric: String,
        magnitude: String,
        min: String,
        max: String,
    },
    #[error("objective field `{0}` must not be empty")]
    EmptyField(&'static str),
}

impl Objective {
    /// Build an objective from the template fields, checking the magnitude
    /// against the focus metric's domain.
    pub fn from_template(
        metrics: &[Metric],
        activity: &str,
        focus: &str,
        magnitude: f64,
        timeframe: &str,
        scope: &str,
        constraints: Option<&str>,
    ) -> Result<Self, ObjectiveError> {
        for (field, value) in [
            ("activity", activity),
            ("focus", focus),
            ("timeframe", timeframe),
            ("scope", scope),
        ] {
            if value.trim().is_empty() {
                return Err(ObjectiveError::EmptyField(field));
            }
        }
        let metric = metrics
            .iter()
            .find(|m| m.id == focus)
            .ok_or_else(|| ObjectiveError::UnknownMetric(focus.to_string()))?;
        if !magnitude.is_finite() || !metric.contains(magnitude) {
            return Err(ObjectiveError::OutOfDomain {
                metric: metric.id.clone(),
                magnitude: magnitude.to_string(),
                min: metric.domain_min.to_string(),
                max: metric.domain_max.to_string(),
            });
        }
        Ok(Self {
            activity: activity.to_string(),
            focus: focus.to_string(),
            magnitude: Some(magnitude),
            timeframe: timeframe.to_string(),
            scope: scope.to_string(),
            constraints: constraints
                .filter(|c| !c.trim().is_empty())
                .map(str::to_string),
        })
    }

    /// Names of mandatory template fields that are blank.
    pub fn empty_fields(&self) -> Vec<&'static str> {
        [
            ("activity", &self.activity),
            ("focus", &self.focus),
            ("timeframe", &self.timeframe),
            ("scope", &self.scope),
        ]
        .into_iter()
        .filter(|(_, v)| v.trim().is_empty())
        .map(|(k, _)| k)
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Task,
    Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskState {
    AsIs,
    ToBe,
}

impl TaskState {
    pub const ALL: [TaskState; 2] = [TaskState::AsIs, TaskState::ToBe];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskState::AsIs => "AsIs",
            TaskState::ToBe => "ToBe",
        }
    }
}

impl std::str::FromStr for TaskState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "AsIs" => Ok(TaskState::AsIs),
            "ToBe" => Ok(TaskState::ToBe),
            other => Err(format!("unknown task state `{other}` (expected AsIs or ToBe)")),
        }
    }
}

/// A task (requirement implementation) or a quantified goal.
///
/// Goals always carry a metric. Tasks without a metric are functional
/// requirements with the binary As-Is/To-Be state space; tasks with a
/// metric are non-functional and take real-valued levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
    /// As-Is level per usage profile.
    #[serde(default)]
    pub baseline: BTreeMap<String, f64>,
    #[serde(default)]
    pub rationale: String,
}

impl Node {
    pub fn is_task(&self) -> bool {
        self.kind == NodeKind::Task
    }

    pub fn is_goal(&self) -> bool {
        self.kind == NodeKind::Goal
    }

    /// A task with no metric, taking only As-Is/To-Be states.
    pub fn is_functional_task(&self) -> bool {
        self.is_task() && self.metric.is_none()
    }

    /// The objective's magnitude, if this goal carries a quantified one.
    pub fn required_magnitude(&self) -> Option<f64> {
        self.objective.as_ref().and_then(|o| o.magnitude)
    }
}

/// Where a contribution sample sits on the source axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourcePoint {
    Level(f64),
    State(TaskState),
}

/// One elicited data point of a contribution function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample", into = "RawSample")]
pub struct ContributionSample {
    pub source: SourcePoint,
    /// Change of the target's level against its baseline, in the target's unit.
    pub target_delta: f64,
    pub estimate: Option<Estimate>,
    pub confidence: f64,
}

impl ContributionSample {
    pub fn level(level: f64, target_delta: f64, confidence: f64) -> Self {
        Self {
            source: SourcePoint::Level(level),
            target_delta,
            estimate: None,
            confidence,
        }
    }

    pub fn state(state: TaskState, target_delta: f64, confidence: f64) -> Self {
        Self {
            source: SourcePoint::State(state),
            target_delta,
            estimate: None,
            confidence,
        }
    }

    pub fn with_estimate(mut self, estimate: Estimate) -> Self {
        self.target_delta = estimate.nominal();
        self.estimate = Some(estimate);
        self
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state: Option<TaskState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    estimate: Option<Estimate>,
    confidence: f64,
}

impl TryFrom<RawSample> for ContributionSample {
    type Error = String;

    fn try_from(raw: RawSample) -> Result<Self, Self::Error> {
        let source = match (raw.source_level, raw.state) {
            (Some(level), None) => SourcePoint::Level(level),
            (None, Some(state)) => SourcePoint::State(state),
            _ => return Err("a sample needs exactly one of `source_level` or `state`".into()),
        };
        let (target_delta, estimate) = match (raw.target_delta, raw.estimate) {
            (Some(delta), None) => (delta, None),
            (None, Some(est)) => {
                est.check().map_err(|e| e.to_string())?;
                (est.nominal(), Some(est))
            }
            _ => return Err("a sample needs exactly one of `target_delta` or `estimate`".into()),
        };
        Ok(Self {
            source,
            target_delta,
            estimate,
            confidence: raw.confidence,
        })
    }
}

impl From<ContributionSample> for RawSample {
    fn from(s: ContributionSample) -> Self {
        let (source_level, state) = match s.source {
            SourcePoint::Level(l) => (Some(l), None),
            SourcePoint::State(st) => (None, Some(st)),
        };
        let (target_delta, estimate) = match s.estimate {
            Some(est) => (None, Some(est)),
            None => (Some(s.target_delta), None),
        };
        RawSample {
            source_level,
            state,
            target_delta,
            estimate,
            confidence: s.confidence,
        }
    }
}

/// A quantified contribution from one node to a goal, sampled per usage
/// profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContributionLink {
    pub id: String,
    pub source: String,
    pub target: String,
    pub absolute_figures: bool,
    #[serde(default)]
    pub provenance: String,
    pub samples: BTreeMap<String, Vec<ContributionSample>>,
}

impl ContributionLink {
    /// True when samples are keyed by task state rather than level.
    pub fn is_discrete(&self) -> bool {
        self.samples
            .values()
            .flatten()
            .next()
            .is_some_and(|s| matches!(s.source, SourcePoint::State(_)))
    }

    /// Samples for `profile`, falling back to `default_profile`.
    pub fn samples_for(&self, profile: &str, default_profile: &str) -> Option<&[ContributionSample]> {
        self.samples
            .get(profile)
            .or_else(|| self.samples.get(default_profile))
            .map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Sum,
    Min,
    Max,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub name: String,
    #[serde(default)]
    pub version: String,
    #[serde(default)]
    pub authors: Vec<String>,
    /// Profile whose samples stand in when a link has none for the
    /// requested profile. Defaults to the first profile id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_profile: Option<String>,
}

/// The whole model: metrics, profiles, stakeholders, nodes, contribution
/// links and root-goal utilities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoalGraph {
    pub metadata: Metadata,
    pub metrics: Vec<Metric>,
    pub profiles: Vec<UsageProfile>,
    pub stakeholders: Vec<Stakeholder>,
    pub nodes: Vec<Node>,
    pub links: Vec<ContributionLink>,
    pub utilities: Vec<UtilityFunction>,
    /// Per-goal rule for combining inbound contributions; absent means sum.
    pub aggregation: BTreeMap<String, Aggregation>,
}

pub const DEFAULT_PROFILE: &str = "Normal";

impl GoalGraph {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn metric(&self, id: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.id == id)
    }

    pub fn link(&self, id: &str) -> Option<&ContributionLink> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn node_metric(&self, node: &Node) -> Option<&Metric> {
        node.metric.as_deref().and_then(|m| self.metric(m))
    }

    pub fn has_profile(&self, id: &str) -> bool {
        self.profiles.iter().any(|p| p.id == id)
    }

    pub fn default_profile(&self) -> &str {
        self.metadata
            .default_profile
            .as_deref()
            .or_else(|| self.profiles.iter().map(|p| p.id.as_str()).min())
            .unwrap_or(DEFAULT_PROFILE)
    }

    pub fn aggregation_for(&self, node: &str) -> Aggregation {
        self.aggregation.get(node).copied().unwrap_or_default()
    }

    /// Goals with no outgoing links.
    pub fn root_goals(&self) -> Vec<&Node> {
        self.nodes
            .iter()
            .filter(|n| n.is_goal() && !self.links.iter().any(|l| l.source == n.id))
            .collect()
    }

    pub fn utilities_for(&self, goal: &str) -> Vec<&UtilityFunction> {
        self.utilities.iter().filter(|u| u.goal == goal).collect()
    }

    /// Ids of every node reachable from `start` along links (excluding `start`).
    pub fn descendants(&self, start: &str) -> Vec<String> {
        let mut seen = std::collections::BTreeSet::new();
        let mut stack = vec![start.to_string()];
        while let Some(cur) = stack.pop() {
            for l in self.links.iter().filter(|l| l.source == cur) {
                if l.target != start && seen.insert(l.target.clone()) {
                    stack.push(l.target.clone());
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Put every collection in id order and imply a default profile.
    pub fn canonicalize(mut self) -> Self {
        if self.profiles.is_empty() {
            self.profiles.push(UsageProfile {
                id: DEFAULT_PROFILE.to_string(),
                name: DEFAULT_PROFILE.to_string(),
                description: String::new(),
            });
        }
        self.metrics.sort_by(|a, b| a.id.cmp(&b.id));
        self.profiles.sort_by(|a, b| a.id.cmp(&b.id));
        self.stakeholders.sort_by(|a, b| a.id.cmp(&b.id));
        self.nodes.sort_by(|a, b| a.id.cmp(&b.id));
        self.links.sort_by(|a, b| a.id.cmp(&b.id));
        self.utilities
            .sort_by(|a, b| (&a.goal, &a.stakeholder).cmp(&(&b.goal, &b.stakeholder)));
        for link in &mut self.links {
            for samples in link.samples.values_mut() {
                samples.sort_by(|a, b| match (a.source, b.source) {
                    (SourcePoint::Level(x), SourcePoint::Level(y)) => x.total_cmp(&y),
                    (SourcePoint::State(x), SourcePoint::State(y)) => x.cmp(&y),
                    (SourcePoint::State(_), SourcePoint::Level(_)) => std::cmp::Ordering::Less,
                    (SourcePoint::Level(_), SourcePoint::State(_)) => std::cmp::Ordering::Greater,
                });
            }
        }
        self
    }
}
