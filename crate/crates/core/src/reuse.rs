//! Goal similarity for duplicate detection across projects, and the
//! reusability lints on contribution links.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::{rules, ContributionLink, Finding, GoalGraph, Metric, Node};

pub const TEXT_WEIGHT: f64 = 0.7;
pub const METRIC_WEIGHT: f64 = 0.3;
pub const DEFAULT_DUPLICATE_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReuseError {
    #[error("`{0}` is a task; similarity compares goals")]
    NotAGoal(String),
    #[error("goal `{0}` has no resolvable metric")]
    MissingMetric(String),
    #[error("threshold {0} must be in (0, 1]")]
    Threshold(f64),
}

/// A goal paired with its metric, so goals from different graphs compare.
#[derive(Debug, Clone, Copy)]
pub struct GoalRef<'a> {
    pub node: &'a Node,
    pub metric: &'a Metric,
}

impl<'a> GoalRef<'a> {
    pub fn new(graph: &'a GoalGraph, node: &'a Node) -> Result<Self, ReuseError> {
        if !node.is_goal() {
            return Err(ReuseError::NotAGoal(node.id.clone()));
        }
        let metric = graph
            .node_metric(node)
            .ok_or_else(|| ReuseError::MissingMetric(node.id.clone()))?;
        Ok(Self { node, metric })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Components {
    pub text_jaccard: f64,
    pub metric_match: f64,
}

/// Node identity across the compared graphs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GoalKey {
    pub graph: usize,
    pub node: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityScore {
    pub a: GoalKey,
    pub b: GoalKey,
    pub score: f64,
    pub components: Components,
}

/// Lower-cased tokens of name and description, punctuation removed.
pub fn tokens(node: &Node) -> BTreeSet<String> {
    format!("{} {}", node.name, node.description)
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Weighted lexical and metric similarity of two goals.
pub fn similarity_components(a: GoalRef<'_>, b: GoalRef<'_>) -> Components {
    let same_metric = a.metric.id == b.metric.id
        || (a.metric.unit == b.metric.unit && a.metric.direction == b.metric.direction);
    Components {
        text_jaccard: jaccard(&tokens(a.node), &tokens(b.node)),
        metric_match: if same_metric { 1.0 } else { 0.0 },
    }
}

pub fn combined_score(c: Components) -> f64 {
    (TEXT_WEIGHT * c.text_jaccard + METRIC_WEIGHT * c.metric_match).clamp(0.0, 1.0)
}

/// Similarity score of two goals from graph 0.
pub fn similarity(a: GoalRef<'_>, b: GoalRef<'_>) -> SimilarityScore {
    let components = similarity_components(a, b);
    SimilarityScore {
        a: GoalKey {
            graph: 0,
            node: a.node.id.clone(),
        },
        b: GoalKey {
            graph: 0,
            node: b.node.id.clone(),
        },
        score: combined_score(components),
        components,
    }
}

/// All goal pairs, within and across graphs, scoring at least `threshold`,
/// best first with ties broken by the key pair.
pub fn find_duplicates(graphs: &[GoalGraph], threshold: f64) -> Result<Vec<SimilarityScore>, ReuseError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(ReuseError::Threshold(threshold));
    }
    let mut goals: Vec<(GoalKey, GoalRef<'_>)> = Vec::new();
    for (gi, graph) in graphs.iter().enumerate() {
        for node in graph.nodes.iter().filter(|n| n.is_goal()) {
            let key = GoalKey {
                graph: gi,
                node: node.id.clone(),
            };
            goals.push((key, GoalRef::new(graph, node)?));
        }
    }
    let mut out = Vec::new();
    for i in 0..goals.len() {
        for j in (i + 1)..goals.len() {
            let components = similarity_components(goals[i].1, goals[j].1);
            let score = combined_score(components);
            if score >= threshold {
                out.push(SimilarityScore {
                    a: goals[i].0.clone(),
                    b: goals[j].0.clone(),
                    score,
                    components,
                });
            }
        }
    }
    out.sort_by(|x, y| {
        y.score
            .total_cmp(&x.score)
            .then_with(|| (&x.a, &x.b).cmp(&(&y.a, &y.b)))
    });
    Ok(out)
}

/// Reusability warnings for one link: relative-only figures, missing
/// provenance, or percentage deltas with no declared base.
pub fn lint_reusability(graph: &GoalGraph, link: &ContributionLink) -> Vec<Finding> {
    let mut out = Vec::new();
    if !link.absolute_figures {
        out.push(Finding::warning(
            rules::RELATIVE_ONLY,
            link.id.clone(),
            "reusability: relative-only contribution; state the absolute figures behind it",
        ));
    }
    if link.provenance.trim().is_empty() {
        out.push(Finding::warning(
            rules::MISSING_PROVENANCE,
            link.id.clone(),
            "reusability: no provenance recorded for this estimate",
        ));
    }
    let target_metric = graph.node(&link.target).and_then(|n| graph.node_metric(n));
    if let Some(m) = target_metric {
        if m.is_percent() && m.base.as_deref().and_then(|b| graph.metric(b)).is_none() {
            out.push(Finding::warning(
                rules::PERCENT_BASE,
                link.id.clone(),
                format!("reusability: deltas are percentages of metric `{}` with no declared base", m.id),
            ));
        }
    }
    out
}
