mod common;

use std::collections::BTreeMap;

use common::{random_graph, random_utility, rng, RandomGraphOptions, PROFILE};
use goalbench_core::interp::PiecewiseLinear;
use goalbench_core::model::{
    parse_model, serialize_model, ContributionLink, ContributionSample, Direction, GoalGraph, Metric, Node, NodeKind,
    Scale, SourcePoint, UsageProfile,
};
use goalbench_core::propagation::{eval_link, propagate, whatif_diff, Assignment, Scenario};
use goalbench_core::reuse::{similarity, GoalRef};
use goalbench_core::valuation::{aggregate_utilities, scenario_utility, UtilityFunction};
use proptest::prelude::*;
use rand::Rng;

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

fn knots() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::btree_map(-1_000_000i64..1_000_000, (-1e6..1e6f64, 0.0..=1.0f64), 2..12).prop_map(|m| {
        m.into_iter()
            .map(|(x, (d, c))| (x as f64 / 64.0, d, c))
            .collect()
    })
}

fn continuous_link(points: &[(f64, f64, f64)]) -> ContributionLink {
    ContributionLink {
        id: "L".into(),
        source: "A".into(),
        target: "B".into(),
        absolute_figures: true,
        provenance: String::new(),
        samples: BTreeMap::from([(
            PROFILE.to_string(),
            points.iter().map(|&(x, d, c)| ContributionSample::level(x, d, c)).collect(),
        )]),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1200))]

    #[test]
    fn contribution_interpolation_hits_every_sample(points in knots()) {
        let link = continuous_link(&points);
        for &(x, d, c) in &points {
            let e = eval_link(&link, PROFILE, SourcePoint::Level(x)).unwrap();
            prop_assert!(rel_close(e.target_delta, d), "{} vs {}", e.target_delta, d);
            prop_assert!(rel_close(e.confidence, c));
            prop_assert!(!e.extrapolated);
        }
    }

    #[test]
    fn utility_interpolation_hits_every_sample(points in knots()) {
        let f = UtilityFunction {
            stakeholder: "S".into(),
            goal: "G".into(),
            samples: points.iter().map(|&(x, _, u)| (x, u)).collect(),
        };
        for &(x, u) in &f.samples {
            prop_assert!(rel_close(f.value_at(x), u));
        }
    }

    #[test]
    fn piecewise_linear_stays_between_neighbouring_knots(points in knots(), t in 0.0..1.0f64) {
        let pl = PiecewiseLinear::new(points.iter().map(|&(x, d, _)| (x, d)).collect()).unwrap();
        let (x0, y0, _) = points[0];
        let (x1, y1, _) = points[1];
        let y = pl.eval(x0 + t * (x1 - x0)).value;
        prop_assert!(y >= y0.min(y1) - 1e-9 && y <= y0.max(y1) + 1e-9);
    }
}

#[test]
fn as_is_identity_on_random_graphs() {
    for seed in 0..120 {
        let nodes = 2 + (seed as usize * 7) % 49;
        let g = random_graph(
            seed,
            &RandomGraphOptions {
                nodes,
                density: 0.15,
                identity_at_baseline: true,
                monotone: false,
            },
        );
        let r = propagate(&g, &Scenario::as_is(&g, PROFILE).unwrap()).unwrap();
        for n in g.nodes.iter().filter(|n| n.is_goal()) {
            let want = n.baseline[PROFILE];
            let got = r.level(&n.id).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "seed {seed} {}: {got} vs {want}", n.id);
        }
    }
}

fn random_scenario(g: &GoalGraph, seed: u64) -> Scenario {
    let mut r = rng(seed ^ 0x5eed);
    let mut s = Scenario::as_is(g, PROFILE).unwrap();
    for n in g.nodes.iter().filter(|n| n.is_task()) {
        let value = match g.node_metric(n) {
            None => Assignment::State(if r.random_bool(0.5) {
                goalbench_core::model::TaskState::ToBe
            } else {
                goalbench_core::model::TaskState::AsIs
            }),
            Some(m) => Assignment::Level(r.random_range(m.domain_min..=m.domain_max)),
        };
        s.assign(g, &n.id, value).unwrap();
    }
    s
}

#[test]
fn confidence_never_increases_along_paths() {
    for seed in 0..100 {
        let g = random_graph(
            1000 + seed,
            &RandomGraphOptions {
                nodes: 5 + seed as usize % 30,
                density: 0.2,
                identity_at_baseline: false,
                monotone: false,
            },
        );
        let r = propagate(&g, &random_scenario(&g, seed)).unwrap();
        for l in &g.links {
            let (a, b) = (r.confidence(&l.source).unwrap(), r.confidence(&l.target).unwrap());
            assert!(b <= a + 1e-15, "seed {seed} link {}: {a} -> {b}", l.id);
        }
        for path in common::paths(&g, 200) {
            let confs: Vec<f64> = path.iter().map(|id| r.confidence(id).unwrap()).collect();
            assert!(confs.windows(2).all(|w| w[1] <= w[0] + 1e-15), "seed {seed} {path:?}");
            assert!(confs.iter().all(|c| (0.0..=1.0).contains(c)));
        }
    }
}

#[test]
fn whatif_against_itself_is_zero() {
    for seed in 0..100 {
        let g = random_graph(
            2000 + seed,
            &RandomGraphOptions {
                nodes: 3 + seed as usize % 40,
                density: 0.2,
                identity_at_baseline: false,
                monotone: false,
            },
        );
        let s = random_scenario(&g, seed);
        let w = whatif_diff(&g, &s, &s).unwrap();
        assert!(w.nodes.values().all(|d| d.delta == 0.0), "seed {seed}");
    }
}

fn chain_metric(id: &str) -> Metric {
    Metric {
        id: id.into(),
        name: id.into(),
        unit: "u".into(),
        scale: Scale::Ratio,
        domain_min: 0.0,
        domain_max: 100.0,
        direction: Direction::Minimize,
        base: None,
    }
}

/// Task X feeds N1 -> N2 -> ... through links whose deltas never increase
/// with the source level.
fn monotone_chain(seed: u64, len: usize) -> GoalGraph {
    let mut r = rng(seed);
    let mut g = GoalGraph {
        profiles: vec![UsageProfile {
            id: PROFILE.into(),
            name: PROFILE.into(),
            description: String::new(),
        }],
        ..Default::default()
    };
    for i in 0..=len {
        let id = format!("N{i}");
        g.metrics.push(chain_metric(&format!("m{i}")));
        g.nodes.push(Node {
            id,
            kind: if i == 0 { NodeKind::Task } else { NodeKind::Goal },
            name: String::new(),
            description: String::new(),
            metric: Some(format!("m{i}")),
            objective: None,
            baseline: BTreeMap::from([(PROFILE.to_string(), 50.0)]),
            rationale: String::new(),
        });
    }
    for i in 0..len {
        let mut levels: Vec<f64> = (0..r.random_range(2..6)).map(|_| r.random_range(0.0..100.0)).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        if levels.len() < 2 {
            levels = vec![0.0, 100.0];
        }
        let mut deltas: Vec<f64> = levels.iter().map(|_| r.random_range(-40.0..40.0)).collect();
        deltas.sort_by(|a, b| b.total_cmp(a));
        g.links.push(ContributionLink {
            id: format!("L{i}"),
            source: format!("N{i}"),
            target: format!("N{}", i + 1),
            absolute_figures: true,
            provenance: String::new(),
            samples: BTreeMap::from([(
                PROFILE.to_string(),
                levels
                    .iter()
                    .zip(&deltas)
                    .map(|(&x, &d)| ContributionSample::level(x, d, 1.0))
                    .collect(),
            )]),
        });
    }
    g
}

#[test]
fn monotone_segments_give_monotone_path_response() {
    for seed in 0..60 {
        let len = 1 + seed as usize % 5;
        let g = monotone_chain(3000 + seed, len);
        let end = format!("N{len}");
        let mut s = Scenario::as_is(&g, PROFILE).unwrap();
        let mut ys = Vec::new();
        for k in 0..=400 {
            s.assign(&g, "N0", Assignment::Level(k as f64 / 4.0)).unwrap();
            ys.push(propagate(&g, &s).unwrap().level(&end).unwrap());
        }
        let up = ys.windows(2).all(|w| w[1] >= w[0] - 1e-9);
        let down = ys.windows(2).all(|w| w[1] <= w[0] + 1e-9);
        assert!(up || down, "seed {seed}: response not monotone");
        // odd chains of decreasing links decrease, even ones increase
        if len % 2 == 1 {
            assert!(down, "seed {seed}");
        } else {
            assert!(up, "seed {seed}");
        }
    }
}

#[test]
fn aggregate_utility_lies_between_stakeholders() {
    let metric = chain_metric("m");
    let mut r = rng(7);
    for case in 0..200 {
        let k = r.random_range(1..6);
        let fns: Vec<UtilityFunction> = (0..k)
            .map(|i| random_utility(&format!("S{i}"), "G", &metric, &mut r))
            .collect();
        let refs: Vec<&UtilityFunction> = fns.iter().collect();
        let crowd = aggregate_utilities(&refs).unwrap();
        for step in 0..=200 {
            let x = step as f64 / 2.0;
            let vals: Vec<f64> = fns.iter().map(|f| f.value_at(x)).collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let a = crowd.value_at(x);
            assert!(a >= lo - 1e-12 && a <= hi + 1e-12, "case {case} at {x}: {a} not in [{lo}, {hi}]");
            assert!((0.0..=1.0).contains(&a));
        }
    }
}

/// Two root goals valued by random stakeholders, fed by one functional task.
fn two_root_graph(seed: u64) -> GoalGraph {
    let mut r = rng(seed);
    let mut g = monotone_chain(seed, 1);
    g.nodes[0].metric = None;
    g.nodes[0].baseline.clear();
    g.links[0].samples.insert(
        PROFILE.to_string(),
        vec![
            ContributionSample::state(goalbench_core::model::TaskState::AsIs, 0.0, 1.0),
            ContributionSample::state(goalbench_core::model::TaskState::ToBe, r.random_range(-50.0..50.0), 1.0),
        ],
    );
    let mut second = g.nodes[1].clone();
    second.id = "R".into();
    g.nodes.push(second);
    let mut link = g.links[0].clone();
    link.id = "LR".into();
    link.target = "R".into();
    link.samples.get_mut(PROFILE).unwrap()[1].target_delta = r.random_range(-50.0..50.0);
    g.links.push(link);
    let metric = g.metrics[1].clone();
    for goal in ["N1", "R"] {
        for s in ["S1", "S2", "S3"] {
            g.utilities.push(random_utility(s, goal, &metric, &mut r));
        }
    }
    g.canonicalize()
}

#[test]
fn argmax_survives_weight_rescaling() {
    use goalbench_core::model::TaskState::{AsIs, ToBe};
    for seed in 0..100 {
        let g = two_root_graph(4000 + seed);
        let mut r = rng(seed);
        let (w1, w2) = (r.random_range(0.1..5.0), r.random_range(0.1..5.0));
        let scale = r.random_range(0.01..100.0);
        let best = |w: &BTreeMap<String, f64>| {
            let totals: Vec<f64> = [AsIs, ToBe]
                .iter()
                .map(|&st| {
                    let mut s = Scenario::as_is(&g, PROFILE).unwrap();
                    s.assign(&g, "N0", Assignment::State(st)).unwrap();
                    scenario_utility(&g, &s, Some(w)).unwrap().aggregate
                })
                .collect();
            if (totals[0] - totals[1]).abs() < 1e-9 {
                None
            } else {
                Some(totals[1] > totals[0])
            }
        };
        let w = BTreeMap::from([("N1".to_string(), w1), ("R".to_string(), w2)]);
        let scaled = w.iter().map(|(k, v)| (k.clone(), v * scale)).collect();
        assert_eq!(best(&w), best(&scaled), "seed {seed}");
    }
}

#[test]
fn similarity_is_reflexive_and_symmetric() {
    let mut graphs = Vec::new();
    for seed in 0..20 {
        let mut g = random_graph(
            5000 + seed,
            &RandomGraphOptions {
                nodes: 8,
                density: 0.0,
                identity_at_baseline: false,
                monotone: false,
            },
        );
        let words = ["reduce", "menial", "work", "staff", "hours", "media", "improve", "motivation"];
        let mut r = rng(seed);
        for n in &mut g.nodes {
            n.name = (0..3).map(|_| words[r.random_range(0..words.len())]).collect::<Vec<_>>().join(" ");
            n.description = if r.random_bool(0.5) { "Work, hours!".into() } else { String::new() };
        }
        graphs.push(g);
    }
    let goals: Vec<GoalRef> = graphs
        .iter()
        .flat_map(|g| g.nodes.iter().filter(|n| n.is_goal()).map(move |n| GoalRef::new(g, n).unwrap()))
        .collect();
    for a in &goals {
        assert_eq!(similarity(*a, *a).score, 1.0);
        for b in &goals {
            let (ab, ba) = (similarity(*a, *b), similarity(*b, *a));
            assert_eq!(ab.score, ba.score);
            assert!((0.0..=1.0).contains(&ab.score));
        }
    }
}

#[test]
fn serialization_round_trips_on_random_graphs() {
    for seed in 0..100 {
        let g = random_graph(
            6000 + seed,
            &RandomGraphOptions {
                nodes: 2 + seed as usize % 30,
                density: 0.2,
                identity_at_baseline: seed % 2 == 0,
                monotone: false,
            },
        );
        let text = serialize_model(&g);
        let back = parse_model(&text).unwrap();
        let canon = g.clone().canonicalize();
        assert_eq!(back, canon, "seed {seed}");
        assert_eq!(serialize_model(&back), text, "seed {seed}");
    }
}

#[test]
fn declaration_order_does_not_change_bytes() {
    for seed in 0..30 {
        let g = random_graph(
            7000 + seed,
            &RandomGraphOptions {
                nodes: 12,
                density: 0.3,
                identity_at_baseline: false,
                monotone: false,
            },
        );
        let mut r = rng(seed);
        let mut shuffled = g.clone();
        shuffled.nodes = common::shuffled(&g.nodes, &mut r);
        shuffled.links = common::shuffled(&g.links, &mut r);
        shuffled.metrics = common::shuffled(&g.metrics, &mut r);
        assert_eq!(serialize_model(&shuffled), serialize_model(&g));
    }
}
