use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{PropagationError, Scenario};
use crate::interp::Bracket;
use crate::model::{Aggregation, ContributionLink, ContributionSample, GoalGraph, Metric, Node, SourcePoint, TaskState};

/// Result of evaluating one contribution function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkEval {
    pub target_delta: f64,
    pub confidence: f64,
    pub extrapolated: bool,
}

/// Evaluate a link under exactly `profile` (no fallback).
pub fn eval_link(link: &ContributionLink, profile: &str, input: SourcePoint) -> Result<LinkEval, PropagationError> {
    let samples = link
        .samples
        .get(profile)
        .ok_or_else(|| PropagationError::MissingProfileSamples {
            link: link.id.clone(),
            profile: profile.to_string(),
        })?;
    eval_samples(&link.id, samples, None, input)
}

/// Evaluate a sample list; `deltas`, when given, replaces each sample's
/// target delta (same length and order as `samples`).
pub fn eval_samples(
    link: &str,
    samples: &[ContributionSample],
    deltas: Option<&[f64]>,
    input: SourcePoint,
) -> Result<LinkEval, PropagationError> {
    let delta_at = |i: usize| deltas.map_or(samples[i].target_delta, |d| d[i]);
    let invalid = |reason: &str| PropagationError::InvalidLink {
        link: link.to_string(),
        reason: reason.to_string(),
    };
    let first = samples.first().ok_or_else(|| invalid("no samples"))?;
    match (first.source, input) {
        (SourcePoint::State(_), SourcePoint::State(state)) => {
            let i = samples
                .iter()
                .position(|s| s.source == SourcePoint::State(state))
                .ok_or_else(|| PropagationError::MissingState {
                    link: link.to_string(),
                    state,
                })?;
            Ok(LinkEval {
                target_delta: delta_at(i),
                confidence: samples[i].confidence,
                extrapolated: false,
            })
        }
        (SourcePoint::Level(_), SourcePoint::Level(x)) => {
            let level_at = |i: usize| match samples[i].source {
                SourcePoint::Level(l) => l,
                SourcePoint::State(_) => f64::NAN,
            };
            let bracket = Bracket::locate(samples.len(), level_at, x);
            Ok(LinkEval {
                target_delta: bracket.apply(delta_at),
                confidence: bracket.apply(|i| samples[i].confidence),
                extrapolated: bracket.extrapolated(),
            })
        }
        (SourcePoint::State(_), SourcePoint::Level(_)) => Err(invalid("level queried on a state-keyed link")),
        (SourcePoint::Level(_), SourcePoint::State(_)) => Err(invalid("state queried on a level-keyed link")),
    }
}

/// One inbound contribution to a goal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inbound {
    pub target_delta: f64,
    pub link_confidence: f64,
    pub source_confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregated {
    pub attained_level: f64,
    pub confidence: f64,
}

/// Combine inbound deltas against the baseline and clamp to the metric.
///
/// Confidence is the weakest inbound `link × source` product; a node with no
/// inbound contributions keeps its baseline at full confidence.
pub fn aggregate_parent(metric: &Metric, baseline: f64, policy: Aggregation, inbound: &[Inbound]) -> Aggregated {
    if inbound.is_empty() {
        return Aggregated {
            attained_level: metric.clamp(baseline),
            confidence: 1.0,
        };
    }
    let deltas = inbound.iter().map(|c| c.target_delta);
    let combined = match policy {
        Aggregation::Sum => deltas.sum(),
        Aggregation::Min => deltas.fold(f64::INFINITY, f64::min),
        Aggregation::Max => deltas.fold(f64::NEG_INFINITY, f64::max),
    };
    let confidence = inbound
        .iter()
        .map(|c| c.link_confidence * c.source_confidence)
        .fold(1.0, f64::min)
        .clamp(0.0, 1.0);
    Aggregated {
        attained_level: metric.clamp(baseline + combined),
        confidence,
    }
}

/// Satisfaction degree in [0, 1] and the binary satisfied flag.
///
/// The degree measures progress from baseline towards the magnitude and is
/// exactly 1 if and only if the objective is met.
pub fn satisfaction(metric: &Metric, baseline: f64, magnitude: f64, attained: f64) -> (f64, bool) {
    let satisfied = metric.meets(attained, magnitude);
    if satisfied {
        return (1.0, true);
    }
    let span = magnitude - baseline;
    let degree = if span == 0.0 || metric.meets(baseline, magnitude) {
        0.0
    } else {
        ((attained - baseline) / span).clamp(0.0, 1.0)
    };
    (degree.min(1.0 - f64::EPSILON), false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeResult {
    /// Present for functional tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<TaskState>,
    /// Present for goals and NFR-valued tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attained_level: Option<f64>,
    /// Present for goals with a quantified objective.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfaction_degree: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfied: Option<bool>,
    pub confidence: f64,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub profile: String,
    pub nodes: BTreeMap<String, NodeResult>,
}

impl PropagationResult {
    pub fn level(&self, node: &str) -> Option<f64> {
        self.nodes.get(node).and_then(|r| r.attained_level)
    }

    pub fn confidence(&self, node: &str) -> Option<f64> {
        self.nodes.get(node).map(|r| r.confidence)
    }

    pub fn satisfied(&self, node: &str) -> Option<bool> {
        self.nodes.get(node).and_then(|r| r.satisfied)
    }
}

/// A graph prepared for repeated propagation: node index, resolved link
/// endpoints and a topological order.
#[derive(Debug)]
pub struct Engine<'g> {
    graph: &'g GoalGraph,
    index: HashMap<&'g str, usize>,
    order: Vec<usize>,
    inbound: Vec<Vec<usize>>,
    ends: Vec<(usize, usize)>,
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g GoalGraph) -> Result<Self, PropagationError> {
        let index: HashMap<&str, usize> = graph
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let n = graph.nodes.len();
        let mut inbound = vec![Vec::new(); n];
        let mut outbound = vec![Vec::new(); n];
        let mut ends = Vec::with_capacity(graph.links.len());
        for (li, link) in graph.links.iter().enumerate() {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| PropagationError::UnknownNode(id.to_string()))
            };
            let (s, t) = (lookup(&link.source)?, lookup(&link.target)?);
            if graph.nodes[t].is_task() {
                return Err(PropagationError::InvalidLink {
                    link: link.id.clone(),
                    reason: "targets a task".into(),
                });
            }
            inbound[t].push(li);
            outbound[s].push(t);
            ends.push((s, t));
        }
        // Kahn's algorithm, smallest index first.
        let mut indegree: Vec<usize> = inbound.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &outbound[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if order.len() != n {
            return Err(PropagationError::Cycle);
        }
        Ok(Self {
            graph,
            index,
            order,
            inbound,
            ends,
        })
    }

    pub fn graph(&self) -> &'g GoalGraph {
        self.graph
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Samples a link uses under `profile`, falling back to the graph's
    /// default profile when the link has none for `profile`.
    pub fn resolved_samples(&self, link: usize, profile: &str) -> Result<&'g [ContributionSample], PropagationError> {
        let l = &self.graph.links[link];
        l.samples_for(profile, self.graph.default_profile())
            .ok_or_else(|| PropagationError::MissingProfileSamples {
                link: l.id.clone(),
                profile: profile.to_string(),
            })
    }

    pub fn propagate(&self, scenario: &Scenario) -> Result<PropagationResult, PropagationError> {
        scenario.check(self.graph)?;
        self.run(scenario, None)
    }

    /// Propagate with per-link delta overrides (indexed like `graph.links`,
    /// each the length of that link's resolved sample list). The scenario
    /// must already have passed [`Scenario::check`].
    pub fn propagate_with_deltas(
        &self,
        scenario: &Scenario,
        deltas: &[Vec<f64>],
    ) -> Result<PropagationResult, PropagationError> {
        self.run(scenario, Some(deltas))
    }

    fn run(&self, scenario: &Scenario, deltas: Option<&[Vec<f64>]>) -> Result<PropagationResult, PropagationError> {
        let graph = self.graph;
        let profile = scenario.profile.as_str();
        let mut results: Vec<Option<NodeResult>> = vec![None; graph.nodes.len()];
        for &v in &self.order {
            let node = &graph.nodes[v];
            let result = if node.is_task() {
                self.task_result(node, scenario)?
            } else {
                self.goal_result(v, node, profile, &results, deltas)?
            };
            results[v] = Some(result);
        }
        Ok(PropagationResult {
            profile: profile.to_string(),
            nodes: graph
                .nodes
                .iter()
                .zip(results)
                .map(|(n, r)| (n.id.clone(), r.expect("every node is visited in topological order")))
                .collect(),
        })
    }

    fn task_result(&self, node: &Node, scenario: &Scenario) -> Result<NodeResult, PropagationError> {
        let mut result = NodeResult {
            state: None,
            attained_level: None,
            satisfaction_degree: None,
            satisfied: None,
            confidence: 1.0,
            extrapolated: false,
        };
        if node.is_functional_task() {
            result.state = Some(
                *scenario
                    .task_states
                    .get(&node.id)
                    .ok_or_else(|| PropagationError::MissingAssignment(node.id.clone()))?,
            );
        } else {
            result.attained_level = Some(
                *scenario
                    .task_levels
                    .get(&node.id)
                    .ok_or_else(|| PropagationError::MissingAssignment(node.id.clone()))?,
            );
        }
        Ok(result)
    }

    fn goal_result(
        &self,
        v: usize,
        node: &Node,
        profile: &str,
        results: &[Option<NodeResult>],
        deltas: Option<&[Vec<f64>]>,
    ) -> Result<NodeResult, PropagationError> {
        let graph = self.graph;
        let metric = graph
            .node_metric(node)
            .ok_or_else(|| PropagationError::MissingMetric(node.id.clone()))?;
        let baseline = *node
            .baseline
            .get(profile)
            .ok_or_else(|| PropagationError::MissingBaseline {
                node: node.id.clone(),
                profile: profile.to_string(),
            })?;
        let mut inbound = Vec::with_capacity(self.inbound[v].len());
        let mut extrapolated = false;
        for &li in &self.inbound[v] {
            let (s, _) = self.ends[li];
            let source = results[s].as_ref().expect("sources precede targets");
            let input = match (source.state, source.attained_level) {
                (Some(state), _) => SourcePoint::State(state),
                (None, Some(level)) => SourcePoint::Level(level),
                (None, None) => return Err(PropagationError::MissingMetric(graph.nodes[s].id.clone())),
            };
            let samples = self.resolved_samples(li, profile)?;
            let eval = eval_samples(
                &graph.links[li].id,
                samples,
                deltas.map(|d| d[li].as_slice()),
                input,
            )?;
            extrapolated |= eval.extrapolated;
            inbound.push(Inbound {
                target_delta: eval.target_delta,
                link_confidence: eval.confidence,
                source_confidence: source.confidence,
            });
        }
        let agg = aggregate_parent(metric, baseline, graph.aggregation_for(&node.id), &inbound);
        let (satisfaction_degree, satisfied) = match node.required_magnitude() {
            Some(magnitude) => {
                let (d, s) = satisfaction(metric, baseline, magnitude, agg.attained_level);
                (Some(d), Some(s))
            }
            None => (None, None),
        };
        Ok(NodeResult {
            state: None,
            attained_level: Some(agg.attained_level),
            satisfaction_degree,
            satisfied,
            confidence: agg.confidence,
            extrapolated,
        })
    }
}

/// Propagate a scenario through a graph.
pub fn propagate(graph: &GoalGraph, scenario: &Scenario) -> Result<PropagationResult, PropagationError> {
    Engine::new(graph)?.propagate(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, Scale};

    fn hours(min: f64, max: f64, direction: Direction) -> Metric {
        Metric {
            id: "h".into(),
            name: "hours".into(),
            unit: "hours/month".into(),
            scale: Scale::Ratio,
            domain_min: min,
            domain_max: max,
            direction,
            base: None,
        }
    }

    fn link(samples: Vec<ContributionSample>) -> ContributionLink {
        ContributionLink {
            id: "L".into(),
            source: "a".into(),
            target: "b".into(),
            absolute_figures: true,
            provenance: "test".into(),
            samples: BTreeMap::from([("Normal".to_string(), samples)]),
        }
    }

    #[test]
    fn eval_link_interpolates_and_clamps() {
        let l = link(vec![
            ContributionSample::level(2.0, -18.0, 0.9),
            ContributionSample::level(20.0, 0.0, 0.9),
        ]);
        let at = |x| eval_link(&l, "Normal", SourcePoint::Level(x)).unwrap();
        assert_eq!(
            at(2.0),
            LinkEval {
                target_delta: -18.0,
                confidence: 0.9,
                extrapolated: false
            }
        );
        assert_eq!(at(11.0).target_delta, -9.0);
        assert_eq!(at(11.0).confidence, 0.9);
        let below = at(0.5);
        assert_eq!(below.target_delta, -18.0);
        assert!(below.extrapolated);
    }

    #[test]
    fn eval_link_errors() {
        let l = link(vec![
            ContributionSample::level(2.0, -18.0, 0.9),
            ContributionSample::level(20.0, 0.0, 0.9),
        ]);
        assert!(matches!(
            eval_link(&l, "Promo", SourcePoint::Level(3.0)),
            Err(PropagationError::MissingProfileSamples { .. })
        ));
        assert!(matches!(
            eval_link(&l, "Normal", SourcePoint::State(TaskState::ToBe)),
            Err(PropagationError::InvalidLink { .. })
        ));
        let d = link(vec![ContributionSample::state(TaskState::ToBe, -1.0, 0.5)]);
        assert!(matches!(
            eval_link(&d, "Normal", SourcePoint::Level(1.0)),
            Err(PropagationError::InvalidLink { .. })
        ));
        assert!(matches!(
            eval_link(&d, "Normal", SourcePoint::State(TaskState::AsIs)),
            Err(PropagationError::MissingState { .. })
        ));
    }

    #[test]
    fn confidence_interpolates_with_delta() {
        let l = link(vec![
            ContributionSample::level(0.0, 0.0, 1.0),
            ContributionSample::level(10.0, 10.0, 0.5),
        ]);
        let e = eval_link(&l, "Normal", SourcePoint::Level(5.0)).unwrap();
        assert_eq!(e.target_delta, 5.0);
        assert_eq!(e.confidence, 0.75);
    }

    #[test]
    fn aggregate_leaf_and_policies() {
        let m = hours(0.0, 200.0, Direction::Minimize);
        assert_eq!(
            aggregate_parent(&m, 100.0, Aggregation::Sum, &[]),
            Aggregated {
                attained_level: 100.0,
                confidence: 1.0
            }
        );
        let inbound = [
            Inbound {
                target_delta: -10.0,
                link_confidence: 0.9,
                source_confidence: 1.0,
            },
            Inbound {
                target_delta: -5.0,
                link_confidence: 0.4,
                source_confidence: 1.0,
            },
        ];
        let sum = aggregate_parent(&m, 100.0, Aggregation::Sum, &inbound);
        assert_eq!(sum.attained_level, 85.0);
        assert_eq!(sum.confidence, 0.4);
        assert_eq!(aggregate_parent(&m, 100.0, Aggregation::Min, &inbound).attained_level, 90.0);
        assert_eq!(aggregate_parent(&m, 100.0, Aggregation::Max, &inbound).attained_level, 95.0);
        let single = [Inbound {
            target_delta: -18.0,
            link_confidence: 0.9,
            source_confidence: 0.8,
        }];
        assert_eq!(aggregate_parent(&m, 100.0, Aggregation::Sum, &single).attained_level, 82.0);
    }

    #[test]
    fn aggregate_clamps_to_domain() {
        let m = hours(0.0, 50.0, Direction::Minimize);
        let big = [Inbound {
            target_delta: -80.0,
            link_confidence: 1.0,
            source_confidence: 1.0,
        }];
        assert_eq!(aggregate_parent(&m, 20.0, Aggregation::Sum, &big).attained_level, 0.0);
    }

    #[test]
    fn satisfaction_degree_cases() {
        let m = hours(0.0, 200.0, Direction::Minimize);
        assert_eq!(satisfaction(&m, 100.0, 85.0, 82.0), (1.0, true));
        assert_eq!(satisfaction(&m, 100.0, 85.0, 85.0), (1.0, true));
        let (d, s) = satisfaction(&m, 100.0, 85.0, 91.0);
        assert!(!s);
        assert!((d - 0.6).abs() < 1e-12);
        assert_eq!(satisfaction(&m, 100.0, 85.0, 120.0), (0.0, false));
        // baseline already meets the magnitude
        assert_eq!(satisfaction(&m, 80.0, 85.0, 90.0), (0.0, false));
        assert_eq!(satisfaction(&m, 80.0, 85.0, 80.0), (1.0, true));
        let up = hours(0.0, 5.0, Direction::Maximize);
        assert_eq!(satisfaction(&up, 3.0, 3.0, 3.0), (1.0, true));
        assert_eq!(satisfaction(&up, 3.0, 3.0, 2.0), (0.0, false));
    }
}
