//! Automatic goal-graph drawing.
//!
//! A layered (Sugiyama-style) pipeline:
//! 1. longest-path layering with dummy nodes on long edges,
//! 2. barycenter crossing reduction with a fixed number of sweeps,
//! 3. centered coordinate assignment,
//! 4. DOT and SVG export.

mod coords;
mod export;
mod layering;
mod ordering;

pub use coords::{assign_coordinates, Layout, LayoutOptions, PlacedEdge, PlacedNode};
pub use export::{export_dot, export_svg};
pub use layering::{assign_layers, Layering};
pub use ordering::{count_crossings, order_layers, Ordering, SWEEPS};

use serde::Serialize;

use crate::model::GoalGraph;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("graph has a cycle; layering needs a DAG")]
    Cycle,
    #[error("edge endpoint {0} is out of range")]
    BadEdge(usize),
    #[error("gaps must be positive (node_gap {node_gap}, layer_gap {layer_gap})")]
    NonPositiveGap { node_gap: f64, layer_gap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Task,
    Goal,
    Dummy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayoutNode {
    pub id: String,
    pub label: String,
    pub shape: Shape,
}

/// A plain directed graph to lay out.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LayoutGraph {
    pub name: String,
    pub nodes: Vec<LayoutNode>,
    pub edges: Vec<(usize, usize)>,
}

impl LayoutGraph {
    /// Nodes and links of a goal graph; links with unknown endpoints are skipped.
    pub fn from_goal_graph(graph: &GoalGraph) -> Self {
        let nodes: Vec<LayoutNode> = graph
            .nodes
            .iter()
            .map(|n| LayoutNode {
                id: n.id.clone(),
                label: n.name.clone(),
                shape: if n.is_task() { Shape::Task } else { Shape::Goal },
            })
            .collect();
        let pos = |id: &str| graph.nodes.iter().position(|n| n.id == id);
        let edges = graph
            .links
            .iter()
            .filter_map(|l| Some((pos(&l.source)?, pos(&l.target)?)))
            .collect();
        Self {
            name: graph.metadata.name.clone(),
            nodes,
            edges,
        }
    }
}

/// Run the whole pipeline on a goal graph.
pub fn layout_goal_graph(graph: &GoalGraph, options: &LayoutOptions) -> Result<Layout, LayoutError> {
    let layering = assign_layers(&LayoutGraph::from_goal_graph(graph))?;
    assign_coordinates(&order_layers(layering), options)
}
