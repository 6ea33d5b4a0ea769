//! Structural checks and quality lints over a goal graph.
//!
//! Validation never aborts: every violated rule becomes a [`Finding`].
//! Structural invariants are errors; Transparency and Reusability lints
//! are warnings.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::document::{reference_problems, ModelError};
use super::types::*;
use crate::reuse::lint_reusability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub rule: &'static str,
    /// Node, link, metric or utility id the finding is about.
    pub subject: String,
    pub message: String,
}

impl Finding {
    pub fn error(rule: &'static str, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            rule,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn warning(rule: &'static str, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            rule,
            subject: subject.into(),
            message: message.into(),
        }
    }
}

pub mod rules {
    pub const DUPLICATE_ID: &str = "duplicate-id";
    pub const DANGLING: &str = "dangling-reference";
    pub const CYCLE: &str = "cycle";
    pub const METRIC_DOMAIN: &str = "metric.domain";
    pub const METRIC_ORDINAL: &str = "metric.ordinal-bounds";
    pub const GOAL_UNQUANTIFIED: &str = "goal.unquantified";
    pub const BASELINE_MISSING: &str = "baseline.missing";
    pub const BASELINE_DOMAIN: &str = "baseline.domain";
    pub const OBJECTIVE_UNQUANTIFIED: &str = "objective.unquantified";
    pub const OBJECTIVE_DOMAIN: &str = "objective.domain";
    pub const OBJECTIVE_FOCUS: &str = "objective.focus";
    pub const OBJECTIVE_ON_TASK: &str = "objective.on-task";
    pub const LINK_TARGET: &str = "link.target-task";
    pub const LINK_KIND: &str = "link.kind";
    pub const LINK_SAMPLES: &str = "link.samples";
    pub const UTILITY_INVALID: &str = "utility.invalid";
    pub const UTILITY_NOT_ROOT: &str = "utility.not-root";
    pub const ROOT_NO_UTILITY: &str = "root.no-utility";
    pub const ORPHAN_TASK: &str = "pertinence.orphan-task";
    pub const AGGREGATION_TARGET: &str = "aggregation.target";
    pub const TRANSPARENCY_DESCRIPTION: &str = "transparency.description";
    pub const TRANSPARENCY_RATIONALE: &str = "transparency.rationale";
    pub const TRANSPARENCY_OBJECTIVE: &str = "transparency.objective-template";
    pub const RELATIVE_ONLY: &str = "reusability.relative-only";
    pub const MISSING_PROVENANCE: &str = "reusability.provenance";
    pub const PERCENT_BASE: &str = "reusability.percent-base";
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn count(&self, rule: &str) -> usize {
        self.findings.iter().filter(|f| f.rule == rule).count()
    }
}

/// Check every structural invariant and quality lint.
pub fn validate(graph: &GoalGraph) -> ValidationReport {
    let mut out = Vec::new();
    for p in reference_problems(graph) {
        match &p {
            ModelError::DuplicateId { id, .. } => {
                out.push(Finding::error(rules::DUPLICATE_ID, id.clone(), p.to_string()))
            }
            ModelError::DanglingReference { id, .. } => {
                out.push(Finding::error(rules::DANGLING, id.clone(), p.to_string()))
            }
            _ => {}
        }
    }
    check_metrics(graph, &mut out);
    check_nodes(graph, &mut out);
    check_links(graph, &mut out);
    check_cycles(graph, &mut out);
    check_utilities(graph, &mut out);
    check_pertinence(graph, &mut out);
    for id in graph.aggregation.keys() {
        if graph.node(id).is_some_and(Node::is_task) {
            out.push(Finding::error(
                rules::AGGREGATION_TARGET,
                id.clone(),
                format!("aggregation policy set on task `{id}`; only goals aggregate contributions"),
            ));
        }
    }
    for link in &graph.links {
        out.extend(lint_reusability(graph, link));
    }
    out.sort();
    out.dedup();
    ValidationReport { findings: out }
}

fn check_metrics(graph: &GoalGraph, out: &mut Vec<Finding>) {
    for m in &graph.metrics {
        if !(m.domain_min.is_finite() && m.domain_max.is_finite() && m.domain_min < m.domain_max) {
            out.push(Finding::error(
                rules::METRIC_DOMAIN,
                m.id.clone(),
                format!("domain [{}, {}] is empty or not finite", m.domain_min, m.domain_max),
            ));
        }
        if m.scale == Scale::Ordinal && (m.domain_min.fract() != 0.0 || m.domain_max.fract() != 0.0) {
            out.push(Finding::error(
                rules::METRIC_ORDINAL,
                m.id.clone(),
                "ordinal metrics need integer domain bounds",
            ));
        }
    }
}

fn check_nodes(graph: &GoalGraph, out: &mut Vec<Finding>) {
    for n in &graph.nodes {
        if n.is_goal() && n.metric.is_none() {
            out.push(Finding::error(
                rules::GOAL_UNQUANTIFIED,
                n.id.clone(),
                "goal has no metric; soft goals are not supported",
            ));
        }
        if let Some(metric) = graph.node_metric(n) {
            let missing: Vec<&str> = graph
                .profiles
                .iter()
                .map(|p| p.id.as_str())
                .filter(|p| !n.baseline.contains_key(*p))
                .collect();
            if !missing.is_empty() {
                out.push(Finding::error(
                    rules::BASELINE_MISSING,
                    n.id.clone(),
                    format!("no baseline for profile(s) {}", missing.join(", ")),
                ));
            }
            let outside: Vec<String> = n
                .baseline
                .iter()
                .filter(|(_, v)| !metric.contains(**v))
                .map(|(p, v)| format!("{p}={v}"))
                .collect();
            if !outside.is_empty() {
                out.push(Finding::error(
                    rules::BASELINE_DOMAIN,
                    n.id.clone(),
                    format!(
                        "baseline {} outside [{}, {}]",
                        outside.join(", "),
                        metric.domain_min,
                        metric.domain_max
                    ),
                ));
            }
        }
        if let Some(obj) = &n.objective {
            if n.is_task() {
                out.push(Finding::error(
                    rules::OBJECTIVE_ON_TASK,
                    n.id.clone(),
                    "objectives belong on goals, not tasks",
                ));
            }
            match obj.magnitude {
                None => out.push(Finding::error(
                    rules::OBJECTIVE_UNQUANTIFIED,
                    n.id.clone(),
                    "objective has no required magnitude",
                )),
                Some(mag) => {
                    if let Some(metric) = graph.metric(&obj.focus) {
                        if !mag.is_finite() || !metric.contains(mag) {
                            out.push(Finding::error(
                                rules::OBJECTIVE_DOMAIN,
                                n.id.clone(),
                                format!(
                                    "magnitude {mag} outside [{}, {}] of `{}`",
                                    metric.domain_min, metric.domain_max, metric.id
                                ),
                            ));
                        }
                    }
                }
            }
            if n.metric.as_deref().is_some_and(|m| m != obj.focus) {
                out.push(Finding::error(
                    rules::OBJECTIVE_FOCUS,
                    n.id.clone(),
                    format!(
                        "objective focus `{}` differs from the goal's metric `{}`",
                        obj.focus,
                        n.metric.as_deref().unwrap_or_default()
                    ),
                ));
            }
            let empty = obj.empty_fields();
            if !empty.is_empty() {
                out.push(Finding::warning(
                    rules::TRANSPARENCY_OBJECTIVE,
                    n.id.clone(),
                    format!("objective template field(s) left empty: {}", empty.join(", ")),
                ));
            }
        }
        if n.description.trim().is_empty() {
            out.push(Finding::warning(
                rules::TRANSPARENCY_DESCRIPTION,
                n.id.clone(),
                "empty description",
            ));
        }
        if n.rationale.trim().is_empty() {
            out.push(Finding::warning(
                rules::TRANSPARENCY_RATIONALE,
                n.id.clone(),
                "empty rationale: say why this node matters",
            ));
        }
    }
}

fn check_links(graph: &GoalGraph, out: &mut Vec<Finding>) {
    for link in &graph.links {
        let (Some(source), Some(target)) = (graph.node(&link.source), graph.node(&link.target)) else {
            continue;
        };
        if target.is_task() {
            out.push(Finding::error(
                rules::LINK_TARGET,
                link.id.clone(),
                format!("link targets task `{}`; contributions flow into goals", target.id),
            ));
        }
        let discrete = link.is_discrete();
        if !link.samples.is_empty() && discrete != source.is_functional_task() {
            let msg = if discrete {
                format!("state-keyed samples need a functional task source, `{}` has a metric", source.id)
            } else {
                format!("level-keyed samples need a metric on source `{}`", source.id)
            };
            out.push(Finding::error(rules::LINK_KIND, link.id.clone(), msg));
        }
        if link.samples.is_empty() {
            out.push(Finding::error(rules::LINK_SAMPLES, link.id.clone(), "link has no samples"));
        }
        let source_metric = graph.node_metric(source);
        for (profile, samples) in &link.samples {
            if let Some(problem) = sample_problem(samples, discrete, source_metric) {
                out.push(Finding::error(
                    rules::LINK_SAMPLES,
                    link.id.clone(),
                    format!("profile `{profile}`: {problem}"),
                ));
            }
        }
    }
}

fn sample_problem(samples: &[ContributionSample], discrete: bool, source_metric: Option<&Metric>) -> Option<String> {
    for s in samples {
        if !(0.0..=1.0).contains(&s.confidence) {
            return Some(format!("confidence {} outside [0, 1]", s.confidence));
        }
        if !s.target_delta.is_finite() {
            return Some("target delta is not finite".into());
        }
        if let Some(Err(e)) = s.estimate.as_ref().map(|e| e.check()) {
            return Some(e.to_string());
        }
    }
    if discrete {
        let mut states = BTreeMap::new();
        for s in samples {
            if let SourcePoint::State(st) = s.source {
                *states.entry(st).or_insert(0) += 1;
            }
        }
        for st in TaskState::ALL {
            match states.get(&st).copied().unwrap_or(0) {
                1 => {}
                0 => return Some(format!("no sample for state {}", st.as_str())),
                _ => return Some(format!("duplicate samples for state {}", st.as_str())),
            }
        }
        return None;
    }
    if samples.len() < 2 {
        return Some("continuous links need at least 2 samples".into());
    }
    let levels: Vec<f64> = samples
        .iter()
        .filter_map(|s| match s.source {
            SourcePoint::Level(l) => Some(l),
            SourcePoint::State(_) => None,
        })
        .collect();
    for w in levels.windows(2) {
        if w[0] == w[1] {
            return Some(format!("duplicate source level {}", w[0]));
        }
        if w[0] > w[1] {
            return Some("samples are not sorted by source level".into());
        }
    }
    if let Some(m) = source_metric {
        if let Some(l) = levels.iter().find(|l| !m.contains(**l)) {
            return Some(format!("source level {l} outside [{}, {}]", m.domain_min, m.domain_max));
        }
    }
    None
}

/// One finding per strongly connected component that contains a cycle.
fn check_cycles(graph: &GoalGraph, out: &mut Vec<Finding>) {
    let ids: Vec<&str> = graph.nodes.iter().map(|n| n.id.as_str()).collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut adj = vec![Vec::new(); ids.len()];
    let mut self_loops = BTreeSet::new();
    for l in &graph.links {
        if let (Some(&s), Some(&t)) = (index.get(l.source.as_str()), index.get(l.target.as_str())) {
            adj[s].push(t);
            if s == t {
                self_loops.insert(s);
            }
        }
    }
    for comp in strongly_connected(&adj) {
        if comp.len() > 1 || self_loops.contains(&comp[0]) {
            let mut members: Vec<&str> = comp.iter().map(|&i| ids[i]).collect();
            members.sort_unstable();
            out.push(Finding::error(
                rules::CYCLE,
                members[0].to_string(),
                format!("contribution links form a cycle through {}", members.join(", ")),
            ));
        }
    }
}

/// Tarjan's algorithm, iterative.
fn strongly_connected(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if *edge < adj[v].len() {
                let w = adj[v][*edge];
                *edge += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

fn check_utilities(graph: &GoalGraph, out: &mut Vec<Finding>) {
    let roots: BTreeSet<&str> = graph.root_goals().iter().map(|n| n.id.as_str()).collect();
    for u in &graph.utilities {
        let subject = format!("{}/{}", u.goal, u.stakeholder);
        let Some(goal) = graph.node(&u.goal) else { continue };
        if goal.is_task() {
            out.push(Finding::error(
                rules::UTILITY_INVALID,
                subject.clone(),
                "utility functions attach to root goals, not tasks",
            ));
            continue;
        }
        if let Err(e) = u.check(graph.node_metric(goal)) {
            out.push(Finding::error(rules::UTILITY_INVALID, subject.clone(), e.to_string()));
        }
        if !roots.contains(u.goal.as_str()) {
            out.push(Finding::warning(
                rules::UTILITY_NOT_ROOT,
                subject,
                format!("`{}` contributes to other goals; its utility is not used", u.goal),
            ));
        }
    }
    for root in roots {
        if graph.utilities.iter().all(|u| u.goal != root) {
            out.push(Finding::error(
                rules::ROOT_NO_UTILITY,
                root.to_string(),
                "root goal has no stakeholder utility function",
            ));
        }
    }
}

/// Every task must reach a goal that carries an objective.
fn check_pertinence(graph: &GoalGraph, out: &mut Vec<Finding>) {
    for task in graph.nodes.iter().filter(|n| n.is_task()) {
        let reaches = graph
            .descendants(&task.id)
            .iter()
            .any(|id| graph.node(id).is_some_and(|n| n.is_goal() && n.objective.is_some()));
        if !reaches {
            out.push(Finding::error(
                rules::ORPHAN_TASK,
                task.id.clone(),
                "task does not trace to any goal carrying a business objective",
            ));
        }
    }
}
