use serde::Serialize;

use super::{LayoutError, Ordering, Shape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutOptions {
    /// Horizontal gap between neighbouring boxes.
    pub node_gap: f64,
    /// Vertical distance between layer centres.
    pub layer_gap: f64,
    pub box_width: f64,
    pub box_height: f64,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        Self {
            node_gap: 40.0,
            layer_gap: 120.0,
            box_width: 160.0,
            box_height: 48.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedNode {
    pub id: String,
    pub label: String,
    pub shape: Shape,
    pub layer: usize,
    pub order: usize,
    /// Box centre.
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedEdge {
    pub source: String,
    pub target: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub name: String,
    pub box_width: f64,
    pub box_height: f64,
    pub crossings: usize,
    pub nodes: Vec<PlacedNode>,
    pub edges: Vec<PlacedEdge>,
}

impl Layout {
    pub fn real_nodes(&self) -> impl Iterator<Item = &PlacedNode> {
        self.nodes.iter().filter(|n| n.shape != Shape::Dummy)
    }

    /// `(min_x, min_y, max_x, max_y)` over node boxes.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let (hw, hh) = (self.box_width / 2.0, self.box_height / 2.0);
        self.nodes.iter().fold(None, |acc, n| {
            let b = (n.x - hw, n.y - hh, n.x + hw, n.y + hh);
            Some(match acc {
                None => b,
                Some((a, c, d, e)) => (a.min(b.0), c.min(b.1), d.max(b.2), e.max(b.3)),
            })
        })
    }
}

/// Centre each layer on x = 0 with a pitch of box width plus `node_gap`;
/// layer `l` sits at y = l · `layer_gap`.
pub fn assign_coordinates(ordering: &Ordering, options: &LayoutOptions) -> Result<Layout, LayoutError> {
    let LayoutOptions {
        node_gap,
        layer_gap,
        box_width,
        box_height,
    } = *options;
    if !(node_gap > 0.0 && layer_gap > 0.0) {
        return Err(LayoutError::NonPositiveGap { node_gap, layer_gap });
    }
    let layering = &ordering.layering;
    let pitch = box_width + node_gap;
    let mut xy = vec![(0.0, 0.0); layering.nodes.len()];
    let mut order = vec![0; layering.nodes.len()];
    for (l, layer) in ordering.layers.iter().enumerate() {
        let centre = (layer.len() as f64 - 1.0) / 2.0;
        for (i, &v) in layer.iter().enumerate() {
            xy[v] = ((i as f64 - centre) * pitch, l as f64 * layer_gap);
            order[v] = i;
        }
    }
    let nodes = layering
        .nodes
        .iter()
        .enumerate()
        .map(|(v, n)| PlacedNode {
            id: n.id.clone(),
            label: n.label.clone(),
            shape: n.shape,
            layer: layering.layer[v],
            order: order[v],
            x: xy[v].0,
            y: xy[v].1,
        })
        .collect();
    let half = box_height / 2.0;
    let edges = layering
        .chains
        .iter()
        .map(|chain| {
            let last = chain.len() - 1;
            let points = chain
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let (x, y) = xy[v];
                    match k {
                        0 => (x, y + half),
                        k if k == last => (x, y - half),
                        _ => (x, y),
                    }
                })
                .collect();
            PlacedEdge {
                source: layering.nodes[chain[0]].id.clone(),
                target: layering.nodes[chain[last]].id.clone(),
                points,
            }
        })
        .collect();
    Ok(Layout {
        name: layering.name.clone(),
        box_width,
        box_height,
        crossings: ordering.crossings,
        nodes,
        edges,
    })
}
