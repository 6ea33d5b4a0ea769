//! Estimate representations and Monte-Carlo propagation.
//!
//! Each run redraws the target delta of every sample carrying an
//! [`Estimate`] and propagates the scenario. Runs draw from independent
//! ChaCha8 streams (seeded from the user seed, stream id = run index), so
//! serial and parallel execution give the same bytes.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Triangular, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::GoalGraph;
use crate::propagation::{Engine, PropagationError, Scenario};

/// Identifies the sampling scheme in reports; bump when draws change.
pub const RNG_ALGORITHM: &str = "chacha8/stream-per-run/v1";

/// A target delta stated as a point, an interval or a three-point estimate.
///
/// Three-point estimates are `[worst, likely, best]`; for minimize-direction
/// targets worst is the larger delta, so either ordering is accepted as long
/// as `likely` lies between the other two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Estimate {
    Point(f64),
    Interval(f64, f64),
    ThreePoint(f64, f64, f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UncertaintyError {
    #[error("estimate values must be finite")]
    NonFinite,
    #[error("interval low {0} exceeds high {1}")]
    InvertedInterval(f64, f64),
    #[error("likely value {likely} is not between worst {worst} and best {best}")]
    LikelyOutside { worst: f64, likely: f64, best: f64 },
    #[error("at least one run is required")]
    NoRuns,
    #[error("run {run}: {source}")]
    Run {
        run: u64,
        #[source]
        source: PropagationError,
    },
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}

impl Estimate {
    pub fn check(&self) -> Result<(), UncertaintyError> {
        match *self {
            Estimate::Point(x) if !x.is_finite() => Err(UncertaintyError::NonFinite),
            Estimate::Interval(lo, hi) if !(lo.is_finite() && hi.is_finite()) => Err(UncertaintyError::NonFinite),
            Estimate::Interval(lo, hi) if lo > hi => Err(UncertaintyError::InvertedInterval(lo, hi)),
            Estimate::ThreePoint(w, l, b) => {
                if !(w.is_finite() && l.is_finite() && b.is_finite()) {
                    return Err(UncertaintyError::NonFinite);
                }
                if (w <= l && l <= b) || (w >= l && l >= b) {
                    Ok(())
                } else {
                    Err(UncertaintyError::LikelyOutside {
                        worst: w,
                        likely: l,
                        best: b,
                    })
                }
            }
            _ => Ok(()),
        }
    }

    /// The delta used by deterministic propagation.
    pub fn nominal(&self) -> f64 {
        match *self {
            Estimate::Point(x) => x,
            Estimate::Interval(lo, hi) => 0.5 * (lo + hi),
            Estimate::ThreePoint(_, likely, _) => likely,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Estimate::Point(_))
    }
}

/// A distribution over target deltas.
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Constant(f64),
    Uniform(Uniform<f64>),
    Triangular(Triangular<f64>),
}

/// Point → constant, interval → uniform, three-point → triangular.
pub fn make_sampler(estimate: &Estimate) -> Result<Sampler, UncertaintyError> {
    estimate.check()?;
    Ok(match *estimate {
        Estimate::Point(x) => Sampler::Constant(x),
        Estimate::Interval(lo, hi) if lo == hi => Sampler::Constant(lo),
        Estimate::Interval(lo, hi) => {
            Sampler::Uniform(Uniform::new_inclusive(lo, hi).map_err(|_| UncertaintyError::InvertedInterval(lo, hi))?)
        }
        Estimate::ThreePoint(w, l, b) => {
            let (min, max) = if w <= b { (w, b) } else { (b, w) };
            if min == max {
                Sampler::Constant(l)
            } else {
                Sampler::Triangular(Triangular::new(min, max, l).map_err(|_| UncertaintyError::LikelyOutside {
                    worst: w,
                    likely: l,
                    best: b,
                })?)
            }
        }
    })
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Constant(x) => *x,
            Sampler::Uniform(d) => d.sample(rng),
            Sampler::Triangular(d) => d.sample(rng),
        }
    }

    /// A deterministic stream of draws for `seed`.
    pub fn stream(self, seed: u64) -> impl Iterator<Item = f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        std::iter::repeat_with(move || self.draw(&mut rng))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSummary {
    pub mean: f64,
    pub stddev: f64,
    pub p05: f64,
    pub p50: f64,
    pub p95: f64,
    /// Fraction of runs meeting the objective (objective goals only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_satisfied: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub profile: String,
    pub runs: u64,
    pub seed: u64,
    pub rng: &'static str,
    pub nodes: BTreeMap<String, NodeSummary>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let (a, b) = (sorted[lo], sorted[hi]);
    if a == b {
        a
    } else {
        a + (h - lo as f64) * (b - a)
    }
}

/// Welford mean and population stddev; exact for constant input.
fn mean_stddev(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    (mean, (m2 / values.len() as f64).max(0.0).sqrt())
}

struct Slot {
    link: usize,
    sample: usize,
    sampler: Sampler,
}

/// Run `runs` propagations with redrawn estimate deltas.
pub fn monte_carlo(graph: &GoalGraph, scenario: &Scenario, runs: u64, seed: u64) -> Result<McSummary, UncertaintyError> {
    if runs == 0 {
        return Err(UncertaintyError::NoRuns);
    }
    scenario.check(graph)?;
    let engine = Engine::new(graph)?;
    let profile = scenario.profile.as_str();

    // Nominal deltas of the sample list each link uses under this profile,
    // plus the slots that get redrawn.
    let mut nominal = Vec::with_capacity(graph.links.len());
    let mut slots = Vec::new();
    for li in 0..graph.links.len() {
        let samples = engine.resolved_samples(li, profile)?;
        nominal.push(samples.iter().map(|s| s.target_delta).collect::<Vec<f64>>());
        for (si, s) in samples.iter().enumerate() {
            if let Some(est) = &s.estimate {
                slots.push(Slot {
                    link: li,
                    sample: si,
                    sampler: make_sampler(est)?,
                });
            }
        }
    }

    let tracked: Vec<(String, bool)> = graph
        .nodes
        .iter()
        .filter(|n| n.is_goal() || n.metric.is_some())
        .map(|n| (n.id.clone(), n.required_magnitude().is_some()))
        .collect();

    let per_run: Vec<Vec<(f64, bool)>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run);
            let mut deltas = nominal.clone();
            for slot in &slots {
                deltas[slot.link][slot.sample] = slot.sampler.draw(&mut rng);
            }
            let result = engine
                .propagate_with_deltas(scenario, &deltas)
                .map_err(|source| UncertaintyError::Run { run, source })?;
            Ok(tracked
                .iter()
                .map(|(id, _)| {
                    let r = &result.nodes[id];
                    (r.attained_level.unwrap_or(f64::NAN), r.satisfied == Some(true))
                })
                .collect())
        })
        .collect::<Result<_, UncertaintyError>>()?;

    let mut nodes = BTreeMap::new();
    for (k, (id, objective)) in tracked.iter().enumerate() {
        let mut values: Vec<f64> = per_run.iter().map(|r| r[k].0).collect();
        let (mean, stddev) = mean_stddev(&values);
        values.sort_by(f64::total_cmp);
        let p_satisfied = objective.then(|| per_run.iter().filter(|r| r[k].1).count() as f64 / runs as f64);
        nodes.insert(
            id.clone(),
            NodeSummary {
                mean,
                stddev,
                p05: quantile(&values, 0.05),
                p50: quantile(&values, 0.50),
                p95: quantile(&values, 0.95),
                p_satisfied,
            },
        );
    }
    Ok(McSummary {
        profile: profile.to_string(),
        runs,
        seed,
        rng: RNG_ALGORITHM,
        nodes,
    })
}
