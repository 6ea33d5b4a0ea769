//! Stakeholder utility over root goals: evaluation, crowd aggregation and
//! disagreement.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::interp::Bracket;
use crate::model::{GoalGraph, Metric};
use crate::propagation::{propagate, PropagationError, Scenario};

/// Stakeholder id used for the crowd-aggregated function.
pub const AGGREGATE_STAKEHOLDER: &str = "aggregate";

/// Default population-stddev threshold above which a level is a conflict.
pub const DEFAULT_CONFLICT_THRESHOLD: f64 = 0.2;

/// A stakeholder's mapping from a root goal's level to utility in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityFunction {
    pub stakeholder: String,
    pub goal: String,
    /// `(level, utility)` pairs with strictly increasing levels.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValuationError {
    #[error("utility function needs at least 2 samples, has {0}")]
    TooFewSamples(usize),
    #[error("utility sample levels must be strictly increasing")]
    NotIncreasing,
    #[error("utility {0} outside [0, 1]")]
    UtilityRange(f64),
    #[error("level {level} outside the metric domain [{min}, {max}]")]
    LevelOutOfDomain { level: f64, min: f64, max: f64 },
    #[error("no utility functions given")]
    Empty,
    #[error("utility functions target different goals (`{0}` and `{1}`)")]
    MixedGoals(String, String),
    #[error("disagreement needs at least 2 stakeholders, got {0}")]
    TooFewStakeholders(usize),
    #[error("root goal `{0}` has no utility function")]
    MissingUtility(String),
    #[error("weight for `{0}` refers to no root goal")]
    UnknownWeight(String),
    #[error("weight {weight} for `{goal}` must be finite and non-negative")]
    BadWeight { goal: String, weight: f64 },
    #[error("weights must have a positive sum")]
    ZeroWeights,
    #[error("graph has no root goals")]
    NoRootGoals,
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}

impl UtilityFunction {
    /// Check sample invariants, and domain bounds when a metric is known.
    pub fn check(&self, metric: Option<&Metric>) -> Result<(), ValuationError> {
        if self.samples.len() < 2 {
            return Err(ValuationError::TooFewSamples(self.samples.len()));
        }
        if self.samples.windows(2).any(|w| w[0].0.partial_cmp(&w[1].0) != Some(std::cmp::Ordering::Less)) {
            return Err(ValuationError::NotIncreasing);
        }
        if let Some(&(_, u)) = self.samples.iter().find(|(_, u)| !(0.0..=1.0).contains(u)) {
            return Err(ValuationError::UtilityRange(u));
        }
        if let Some(m) = metric {
            if let Some(&(l, _)) = self.samples.iter().find(|(l, _)| !m.contains(*l)) {
                return Err(ValuationError::LevelOutOfDomain {
                    level: l,
                    min: m.domain_min,
                    max: m.domain_max,
                });
            }
        }
        Ok(())
    }

    /// Interpolated utility, clamped outside the sampled range.
    pub fn value_at(&self, level: f64) -> f64 {
        Bracket::locate(self.samples.len(), |i| self.samples[i].0, level).apply(|i| self.samples[i].1)
    }
}

/// Utility of `level` on the goal's metric.
pub fn eval_utility(f: &UtilityFunction, metric: &Metric, level: f64) -> Result<f64, ValuationError> {
    if !level.is_finite() || !metric.contains(level) {
        return Err(ValuationError::LevelOutOfDomain {
            level,
            min: metric.domain_min,
            max: metric.domain_max,
        });
    }
    Ok(f.value_at(level))
}

fn union_levels(fns: &[&UtilityFunction]) -> Vec<f64> {
    let mut levels: Vec<f64> = fns.iter().flat_map(|f| f.samples.iter().map(|s| s.0)).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
}

fn same_goal<'a>(fns: &[&'a UtilityFunction]) -> Result<&'a str, ValuationError> {
    let first = fns.first().ok_or(ValuationError::Empty)?;
    if let Some(other) = fns.iter().find(|f| f.goal != first.goal) {
        return Err(ValuationError::MixedGoals(first.goal.clone(), other.goal.clone()));
    }
    Ok(&first.goal)
}

/// Pointwise mean over the union of all sample levels.
pub fn aggregate_utilities(fns: &[&UtilityFunction]) -> Result<UtilityFunction, ValuationError> {
    let goal = same_goal(fns)?;
    let n = fns.len() as f64;
    let samples = union_levels(fns)
        .into_iter()
        .map(|l| (l, fns.iter().map(|f| f.value_at(l)).sum::<f64>() / n))
        .collect();
    Ok(UtilityFunction {
        stakeholder: AGGREGATE_STAKEHOLDER.to_string(),
        goal: goal.to_string(),
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSpread {
    pub level: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub goal: String,
    pub threshold: f64,
    pub profile: Vec<LevelSpread>,
    pub max_stddev: f64,
    /// Levels whose stddev exceeds the threshold.
    pub conflicts: Vec<f64>,
}

fn population_stddev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Spread of stakeholder utilities at every union sample level.
pub fn disagreement(fns: &[&UtilityFunction], threshold: f64) -> Result<Disagreement, ValuationError> {
    if fns.len() < 2 {
        return Err(ValuationError::TooFewStakeholders(fns.len()));
    }
    let goal = same_goal(fns)?;
    let profile: Vec<LevelSpread> = union_levels(fns)
        .into_iter()
        .map(|level| {
            let values: Vec<f64> = fns.iter().map(|f| f.value_at(level)).collect();
            LevelSpread {
                level,
                stddev: population_stddev(&values),
            }
        })
        .collect();
    let max_stddev = profile.iter().map(|p| p.stddev).fold(0.0, f64::max);
    let conflicts = profile
        .iter()
        .filter(|p| p.stddev > threshold)
        .map(|p| p.level)
        .collect();
    Ok(Disagreement {
        goal: goal.to_string(),
        threshold,
        profile,
        max_stddev,
        conflicts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalUtility {
    pub level: f64,
    pub weight: f64,
    pub per_stakeholder: BTreeMap<String, f64>,
    pub aggregate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioUtility {
    pub profile: String,
    pub goals: BTreeMap<String, GoalUtility>,
    pub per_stakeholder: BTreeMap<String, f64>,
    pub aggregate: f64,
}

/// Normalized weights over root goals; equal weights when none are given.
pub fn normalize_weights(
    roots: &[String],
    weights: Option<&BTreeMap<String, f64>>,
) -> Result<BTreeMap<String, f64>, ValuationError> {
    if roots.is_empty() {
        return Err(ValuationError::NoRootGoals);
    }
    let raw: BTreeMap<String, f64> = match weights {
        None => roots.iter().map(|r| (r.clone(), 1.0)).collect(),
        Some(w) => {
            if let Some(unknown) = w.keys().find(|k| !roots.contains(k)) {
                return Err(ValuationError::UnknownWeight(unknown.clone()));
            }
            if let Some((goal, &weight)) = w.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
                return Err(ValuationError::BadWeight {
                    goal: goal.clone(),
                    weight,
                });
            }
            roots
                .iter()
                .map(|r| (r.clone(), w.get(r).copied().unwrap_or(0.0)))
                .collect()
        }
    };
    let total: f64 = raw.values().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(ValuationError::ZeroWeights);
    }
    Ok(raw.into_iter().map(|(k, v)| (k, v / total)).collect())
}

/// Utility of a scenario per root goal, per stakeholder and for the crowd.
///
/// A stakeholder's total covers the root goals they valued, with weights
/// renormalized over those goals.
pub fn scenario_utility(
    graph: &GoalGraph,
    scenario: &Scenario,
    weights: Option<&BTreeMap<String, f64>>,
) -> Result<ScenarioUtility, ValuationError> {
    let roots: Vec<String> = graph.root_goals().iter().map(|n| n.id.clone()).collect();
    let weights = normalize_weights(&roots, weights)?;
    let result = propagate(graph, scenario)?;

    let mut goals = BTreeMap::new();
    let mut weighted: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut aggregate = 0.0;
    for root in &roots {
        let node = graph.node(root).expect("root ids come from the graph");
        let metric = graph
            .node_metric(node)
            .ok_or_else(|| PropagationError::MissingMetric(root.clone()))?;
        let fns = graph.utilities_for(root);
        if fns.is_empty() {
            return Err(ValuationError::MissingUtility(root.clone()));
        }
        let level = result
            .level(root)
            .ok_or_else(|| PropagationError::MissingMetric(root.clone()))?;
        let w = weights[root];
        let mut per_stakeholder = BTreeMap::new();
        for f in &fns {
            let u = eval_utility(f, metric, level)?;
            per_stakeholder.insert(f.stakeholder.clone(), u);
            let acc = weighted.entry(f.stakeholder.clone()).or_insert((0.0, 0.0));
            acc.0 += w * u;
            acc.1 += w;
        }
        let crowd = eval_utility(&aggregate_utilities(&fns)?, metric, level)?;
        aggregate += w * crowd;
        goals.insert(
            root.clone(),
            GoalUtility {
                level,
                weight: w,
                per_stakeholder,
                aggregate: crowd,
            },
        );
    }
    let per_stakeholder = weighted
        .into_iter()
        .map(|(s, (sum, w))| (s, if w > 0.0 { sum / w } else { 0.0 }))
        .collect();
    Ok(ScenarioUtility {
        profile: scenario.profile.clone(),
        goals,
        per_stakeholder,
        aggregate,
    })
}

/// Disagreement for every root goal valued by two or more stakeholders.
pub fn disagreement_report(graph: &GoalGraph, threshold: f64) -> Result<Vec<Disagreement>, ValuationError> {
    let goals: BTreeSet<&str> = graph.utilities.iter().map(|u| u.goal.as_str()).collect();
    goals
        .into_iter()
        .map(|g| graph.utilities_for(g))
        .filter(|fns| fns.len() >= 2)
        .map(|fns| disagreement(&fns, threshold))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, Scale};

    fn likert() -> Metric {
        Metric {
            id: "likert".into(),
            name: "motivation".into(),
            unit: "likert".into(),
            scale: Scale::Ordinal,
            domain_min: 0.0,
            domain_max: 5.0,
            direction: Direction::Maximize,
            base: None,
        }
    }

    fn uf(who: &str, samples: &[(f64, f64)]) -> UtilityFunction {
        UtilityFunction {
            stakeholder: who.into(),
            goal: "G4".into(),
            samples: samples.to_vec(),
        }
    }

    fn s1() -> UtilityFunction {
        uf("S1", &[(0.0, 0.0), (3.0, 0.5), (5.0, 1.0)])
    }

    fn s2() -> UtilityFunction {
        uf("S2", &[(0.0, 0.0), (3.0, 0.7), (5.0, 1.0)])
    }

    #[test]
    fn eval_at_fixture_levels() {
        let u = eval_utility(&s1(), &likert(), 3.45).unwrap();
        assert!((u - 0.6125).abs() < 1e-12);
        assert_eq!(eval_utility(&s1(), &likert(), 3.0).unwrap(), 0.5);
        let lin = uf("S", &[(0.0, 0.0), (5.0, 1.0)]);
        assert_eq!(eval_utility(&lin, &likert(), 2.5).unwrap(), 0.5);
        assert!(matches!(
            eval_utility(&s1(), &likert(), 5.5),
            Err(ValuationError::LevelOutOfDomain { .. })
        ));
    }

    #[test]
    fn clamps_outside_samples() {
        let f = uf("S", &[(1.0, 0.2), (4.0, 0.8)]);
        assert_eq!(f.value_at(0.0), 0.2);
        assert_eq!(f.value_at(5.0), 0.8);
    }

    #[test]
    fn aggregate_is_pointwise_mean() {
        let (a, b) = (s1(), s2());
        let agg = aggregate_utilities(&[&a, &b]).unwrap();
        assert!((agg.value_at(3.0) - 0.6).abs() < 1e-12);
        assert!((agg.value_at(3.45) - 0.69).abs() < 1e-12);
        assert!(agg.check(Some(&likert())).is_ok());
        let single = aggregate_utilities(&[&a]).unwrap();
        for l in [0.0, 1.3, 3.0, 4.9] {
            assert_eq!(single.value_at(l), a.value_at(l));
        }
        let twice = aggregate_utilities(&[&a, &a]).unwrap();
        assert_eq!(twice.samples, a.samples);
    }

    #[test]
    fn aggregate_errors() {
        assert_eq!(aggregate_utilities(&[]), Err(ValuationError::Empty));
        let mut other = s2();
        other.goal = "G9".into();
        assert!(matches!(
            aggregate_utilities(&[&s1(), &other]),
            Err(ValuationError::MixedGoals(..))
        ));
    }

    #[test]
    fn disagreement_cases() {
        let (a, b) = (s1(), s2());
        let d = disagreement(&[&a, &b], DEFAULT_CONFLICT_THRESHOLD).unwrap();
        let at3 = d.profile.iter().find(|p| p.level == 3.0).unwrap();
        assert!((at3.stddev - 0.1).abs() < 1e-12);
        assert!(d.conflicts.is_empty());

        let same = disagreement(&[&a, &a], 0.2).unwrap();
        assert!(same.profile.iter().all(|p| p.stddev == 0.0));
        assert_eq!(same.max_stddev, 0.0);

        let low = uf("A", &[(0.0, 0.0), (5.0, 0.0)]);
        let high = uf("B", &[(0.0, 1.0), (5.0, 1.0)]);
        let d = disagreement(&[&low, &high], 0.2).unwrap();
        assert!(d.profile.iter().all(|p| p.stddev == 0.5));
        assert_eq!(d.conflicts, vec![0.0, 5.0]);

        assert_eq!(
            disagreement(&[&a], 0.2),
            Err(ValuationError::TooFewStakeholders(1))
        );
    }

    #[test]
    fn check_rejects_bad_functions() {
        assert_eq!(uf("S", &[(0.0, 0.0)]).check(None), Err(ValuationError::TooFewSamples(1)));
        assert_eq!(
            uf("S", &[(1.0, 0.0), (1.0, 1.0)]).check(None),
            Err(ValuationError::NotIncreasing)
        );
        assert_eq!(
            uf("S", &[(0.0, 0.0), (1.0, 1.5)]).check(None),
            Err(ValuationError::UtilityRange(1.5))
        );
        assert!(matches!(
            uf("S", &[(0.0, 0.0), (6.0, 1.0)]).check(Some(&likert())),
            Err(ValuationError::LevelOutOfDomain { .. })
        ));
    }

    #[test]
    fn weights_normalize() {
        let roots = vec!["A".to_string(), "B".to_string()];
        let eq = normalize_weights(&roots, None).unwrap();
        assert_eq!(eq["A"], 0.5);
        let w = BTreeMap::from([("A".to_string(), 3.0), ("B".to_string(), 1.0)]);
        assert_eq!(normalize_weights(&roots, Some(&w)).unwrap()["A"], 0.75);
        let zero = BTreeMap::from([("A".to_string(), 0.0)]);
        assert_eq!(normalize_weights(&roots[..1], Some(&zero)), Err(ValuationError::ZeroWeights));
        let bad = BTreeMap::from([("C".to_string(), 1.0)]);
        assert_eq!(
            normalize_weights(&roots, Some(&bad)),
            Err(ValuationError::UnknownWeight("C".into()))
        );
        let neg = BTreeMap::from([("A".to_string(), -1.0)]);
        assert!(matches!(
            normalize_weights(&roots, Some(&neg)),
            Err(ValuationError::BadWeight { .. })
        ));
    }
}
