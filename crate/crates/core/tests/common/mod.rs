#![allow(dead_code)]

use std::collections::BTreeMap;

use goalbench_core::model::{
    ContributionLink, ContributionSample, Direction, GoalGraph, Metadata, Metric, Node, NodeKind, Scale, Stakeholder,
    TaskState, UsageProfile,
};
use goalbench_core::valuation::UtilityFunction;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PROFILE: &str = "Normal";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn metric(id: String, rng: &mut ChaCha8Rng) -> Metric {
    let min = rng.random_range(-50.0..50.0_f64).round();
    let width = rng.random_range(10.0..200.0_f64).round();
    Metric {
        id,
        name: "random metric".into(),
        unit: "units".into(),
        scale: Scale::Ratio,
        domain_min: min,
        domain_max: min + width,
        direction: if rng.random_bool(0.5) { Direction::Maximize } else { Direction::Minimize },
        base: None,
    }
}

pub struct RandomGraphOptions {
    pub nodes: usize,
    /// Chance of a link between an earlier node and a later goal.
    pub density: f64,
    /// Make every continuous link pass through zero delta at the source baseline.
    pub identity_at_baseline: bool,
    /// Force every continuous segment to be non-increasing.
    pub monotone: bool,
}

/// A random DAG of tasks (functional and level-valued) and goals. Node `i`
/// may only feed a goal `j > i`, so the graph is acyclic by construction.
pub fn random_graph(seed: u64, opts: &RandomGraphOptions) -> GoalGraph {
    let mut rng = rng(seed);
    let n = opts.nodes.max(2);
    let tasks = rng.random_range(1..=(n / 3).max(1));
    let mut graph = GoalGraph {
        metadata: Metadata {
            name: format!("random-{seed}"),
            ..Default::default()
        },
        profiles: vec![UsageProfile {
            id: PROFILE.into(),
            name: PROFILE.into(),
            description: String::new(),
        }],
        stakeholders: vec![Stakeholder {
            id: "S".into(),
            name: "S".into(),
        }],
        ..Default::default()
    };
    for i in 0..n {
        let id = format!("N{i:02}");
        let is_task = i < tasks;
        let functional = is_task && rng.random_bool(0.6);
        let metric_id = (!functional).then(|| {
            let m = metric(format!("m{i:02}"), &mut rng);
            let id = m.id.clone();
            graph.metrics.push(m);
            id
        });
        let mut baseline = BTreeMap::new();
        if let Some(m) = metric_id.as_deref().and_then(|m| graph.metric(m)) {
            let b = rng.random_range(m.domain_min..=m.domain_max).round();
            baseline.insert(PROFILE.to_string(), b);
        }
        graph.nodes.push(Node {
            id,
            kind: if is_task { NodeKind::Task } else { NodeKind::Goal },
            name: format!("node {i}"),
            description: String::new(),
            metric: metric_id,
            objective: None,
            baseline,
            rationale: String::new(),
        });
    }
    for j in tasks..n {
        for i in 0..j {
            if !rng.random_bool(opts.density) {
                continue;
            }
            let link = random_link(&graph, i, j, &mut rng, opts);
            graph.links.push(link);
        }
    }
    graph
}

fn random_link(graph: &GoalGraph, i: usize, j: usize, rng: &mut ChaCha8Rng, opts: &RandomGraphOptions) -> ContributionLink {
    let source = &graph.nodes[i];
    let target = &graph.nodes[j];
    let width = graph.node_metric(target).unwrap().width();
    let delta = |rng: &mut ChaCha8Rng| rng.random_range(-0.3..0.3) * width;
    let samples = if source.is_functional_task() {
        vec![
            ContributionSample::state(TaskState::AsIs, 0.0, 1.0),
            ContributionSample::state(TaskState::ToBe, delta(rng), rng.random_range(0.0..=1.0)),
        ]
    } else {
        let m = graph.node_metric(source).unwrap();
        let base = source.baseline.get(PROFILE).copied();
        let k = rng.random_range(2..=5);
        let mut levels: Vec<f64> = (0..k).map(|_| rng.random_range(m.domain_min..=m.domain_max)).collect();
        if opts.identity_at_baseline {
            levels.push(base.unwrap());
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        if levels.len() < 2 {
            levels.extend([m.domain_min, m.domain_max]);
            levels.sort_by(f64::total_cmp);
            levels.dedup();
        }
        let mut deltas: Vec<f64> = levels.iter().map(|_| delta(rng)).collect();
        if opts.monotone {
            deltas.sort_by(|a, b| b.total_cmp(a));
        }
        if opts.identity_at_baseline {
            let b = base.unwrap();
            let at = levels.iter().position(|&x| x == b).unwrap();
            let shift = deltas[at];
            for d in &mut deltas {
                *d -= shift;
            }
        }
        levels
            .iter()
            .zip(deltas)
            .map(|(&x, d)| ContributionSample::level(x, d, rng.random_range(0.0..=1.0)))
            .collect()
    };
    ContributionLink {
        id: format!("{}-{}", source.id, target.id),
        source: source.id.clone(),
        target: target.id.clone(),
        absolute_figures: true,
        provenance: "generated".into(),
        samples: BTreeMap::from([(PROFILE.to_string(), samples)]),
    }
}

/// Every simple path from a task, as node id sequences.
pub fn paths(graph: &GoalGraph, limit: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<String>> = graph
        .nodes
        .iter()
        .filter(|n| n.is_task())
        .map(|n| vec![n.id.clone()])
        .collect();
    while let Some(path) = stack.pop() {
        if out.len() >= limit {
            break;
        }
        let last = path.last().unwrap().clone();
        let next: Vec<&ContributionLink> = graph.links.iter().filter(|l| l.source == last).collect();
        if next.is_empty() && path.len() > 1 {
            out.push(path);
            continue;
        }
        for l in next {
            let mut p = path.clone();
            p.push(l.target.clone());
            stack.push(p);
        }
    }
    out
}

/// A random valid utility function over `metric`.
pub fn random_utility(stakeholder: &str, goal: &str, metric: &Metric, rng: &mut ChaCha8Rng) -> UtilityFunction {
    let k = rng.random_range(2..=6);
    let mut levels: Vec<f64> = (0..k)
        .map(|_| rng.random_range(metric.domain_min..=metric.domain_max))
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.len() < 2 {
        levels = vec![metric.domain_min, metric.domain_max];
    }
    UtilityFunction {
        stakeholder: stakeholder.into(),
        goal: goal.into(),
        samples: levels.into_iter().map(|x| (x, rng.random_range(0.0..=1.0))).collect(),
    }
}

pub fn shuffled<T: Clone>(items: &[T], rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut v = items.to_vec();
    v.shuffle(rng);
    v
}
