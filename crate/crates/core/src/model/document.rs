//! The JSON model document and its mapping onto [`GoalGraph`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::types::*;
use crate::canonical::to_canonical_string;
use crate::valuation::UtilityFunction;

pub const FORMAT: &str = "goalbench/1";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format `{0}` (expected `{FORMAT}`)")]
    Format(String),
    #[error("goal `{0}` has no metric; every goal must be quantified")]
    UnquantifiedGoal(String),
    #[error("link `{0}` mixes state-keyed and level-keyed samples")]
    MixedSamples(String),
    #[error("{kind} `{id}` is declared more than once")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{context} refers to undeclared {kind} `{id}`")]
    DanglingReference {
        context: String,
        kind: &'static str,
        id: String,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format: String,
    metadata: Metadata,
    metrics: Vec<Metric>,
    #[serde(default)]
    profiles: Vec<UsageProfile>,
    #[serde(default)]
    stakeholders: Vec<Stakeholder>,
    nodes: Vec<Node>,
    #[serde(default)]
    links: Vec<ContributionLink>,
    #[serde(default)]
    utilities: Vec<UtilityFunction>,
    #[serde(default)]
    aggregation: BTreeMap<String, Aggregation>,
}

/// Parse the document's syntax and schema without resolving references.
///
/// Structural problems that a document can still express (dangling ids,
/// cycles, missing utilities) are left for [`super::validate`].
pub fn parse_document(text: &str) -> Result<GoalGraph, ModelError> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format != FORMAT {
        return Err(ModelError::Format(doc.format));
    }
    if let Some(goal) = doc.nodes.iter().find(|n| n.is_goal() && n.metric.is_none()) {
        return Err(ModelError::UnquantifiedGoal(goal.id.clone()));
    }
    for link in &doc.links {
        let mut kinds = link
            .samples
            .values()
            .flatten()
            .map(|s| matches!(s.source, SourcePoint::State(_)));
        if let Some(first) = kinds.next() {
            if kinds.any(|k| k != first) {
                return Err(ModelError::MixedSamples(link.id.clone()));
            }
        }
    }
    Ok(GoalGraph {
        metadata: doc.metadata,
        metrics: doc.metrics,
        profiles: doc.profiles,
        stakeholders: doc.stakeholders,
        nodes: doc.nodes,
        links: doc.links,
        utilities: doc.utilities,
        aggregation: doc.aggregation,
    }
    .canonicalize())
}

/// Parse a model document and resolve every cross-reference.
pub fn parse_model(text: &str) -> Result<GoalGraph, ModelError> {
    let graph = parse_document(text)?;
    check_references(&graph)?;
    Ok(graph)
}

/// Every problem found by [`check_references`], in deterministic order.
pub(crate) fn reference_problems(graph: &GoalGraph) -> Vec<ModelError> {
    let mut problems = Vec::new();
    let mut dup = |kind: &'static str, ids: Vec<&str>| {
        let mut seen = BTreeSet::new();
        let mut reported = BTreeSet::new();
        for id in ids {
            if !seen.insert(id) && reported.insert(id) {
                problems.push(ModelError::DuplicateId {
                    kind,
                    id: id.to_string(),
                });
            }
        }
    };
    dup("metric", graph.metrics.iter().map(|m| m.id.as_str()).collect());
    dup("profile", graph.profiles.iter().map(|p| p.id.as_str()).collect());
    dup("stakeholder", graph.stakeholders.iter().map(|s| s.id.as_str()).collect());
    dup("node", graph.nodes.iter().map(|n| n.id.as_str()).collect());
    dup("link", graph.links.iter().map(|l| l.id.as_str()).collect());
    let utility_keys: Vec<String> = graph
        .utilities
        .iter()
        .map(|u| format!("{}/{}", u.goal, u.stakeholder))
        .collect();
    dup("utility", utility_keys.iter().map(String::as_str).collect());

    let metrics: BTreeSet<&str> = graph.metrics.iter().map(|m| m.id.as_str()).collect();
    let profiles: BTreeSet<&str> = graph.profiles.iter().map(|p| p.id.as_str()).collect();
    let stakeholders: BTreeSet<&str> = graph.stakeholders.iter().map(|s| s.id.as_str()).collect();
    let nodes: BTreeSet<&str> = graph.nodes.iter().map(|n| n.id.as_str()).collect();

    let mut dangling = |context: String, kind: &'static str, id: &str, known: &BTreeSet<&str>| {
        if !known.contains(id) {
            problems.push(ModelError::DanglingReference {
                context,
                kind,
                id: id.to_string(),
            });
        }
    };
    if let Some(p) = &graph.metadata.default_profile {
        dangling("metadata.default_profile".into(), "profile", p, &profiles);
    }
    for m in &graph.metrics {
        if let Some(base) = &m.base {
            dangling(format!("metric `{}` base", m.id), "metric", base, &metrics);
        }
    }
    for n in &graph.nodes {
        if let Some(m) = &n.metric {
            dangling(format!("node `{}` metric", n.id), "metric", m, &metrics);
        }
        if let Some(o) = &n.objective {
            dangling(format!("node `{}` objective focus", n.id), "metric", &o.focus, &metrics);
        }
        for p in n.baseline.keys() {
            dangling(format!("node `{}` baseline", n.id), "profile", p, &profiles);
        }
    }
    for l in &graph.links {
        dangling(format!("link `{}` source", l.id), "node", &l.source, &nodes);
        dangling(format!("link `{}` target", l.id), "node", &l.target, &nodes);
        for p in l.samples.keys() {
            dangling(format!("link `{}` samples", l.id), "profile", p, &profiles);
        }
    }
    for u in &graph.utilities {
        dangling(format!("utility of `{}`", u.stakeholder), "node", &u.goal, &nodes);
        dangling(format!("utility on `{}`", u.goal), "stakeholder", &u.stakeholder, &stakeholders);
    }
    for id in graph.aggregation.keys() {
        dangling("aggregation".into(), "node", id, &nodes);
    }
    problems
}

fn check_references(graph: &GoalGraph) -> Result<(), ModelError> {
    match reference_problems(graph).into_iter().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

impl Serialize for GoalGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            format: &'static str,
            metadata: &'a Metadata,
            metrics: &'a [Metric],
            profiles: &'a [UsageProfile],
            stakeholders: &'a [Stakeholder],
            nodes: &'a [Node],
            links: &'a [ContributionLink],
            utilities: &'a [UtilityFunction],
            aggregation: &'a BTreeMap<String, Aggregation>,
        }
        Doc {
            format: FORMAT,
            metadata: &self.metadata,
            metrics: &self.metrics,
            profiles: &self.profiles,
            stakeholders: &self.stakeholders,
            nodes: &self.nodes,
            links: &self.links,
            utilities: &self.utilities,
            aggregation: &self.aggregation,
        }
        .serialize(serializer)
    }
}

/// Canonical document text for a graph.
pub fn serialize_model(graph: &GoalGraph) -> String {
    to_canonical_string(&graph.clone().canonicalize())
}
