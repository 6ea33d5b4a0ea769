use super::{LayoutError, LayoutGraph, LayoutNode, Shape};

/// Layer per node, with long edges split by dummy nodes so every edge
/// spans exactly one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layering {
    pub name: String,
    /// Real nodes first (input order), then dummies.
    pub nodes: Vec<LayoutNode>,
    pub layer: Vec<usize>,
    /// Span-one edges after dummy insertion.
    pub edges: Vec<(usize, usize)>,
    /// For each input edge, the node path from source through dummies to target.
    pub chains: Vec<Vec<usize>>,
    pub real_count: usize,
}

impl Layering {
    pub fn layer_count(&self) -> usize {
        self.layer.iter().max().map_or(0, |m| m + 1)
    }
}

/// Longest-path layering: sources on layer 0, every other node one below
/// its deepest predecessor.
pub fn assign_layers(graph: &LayoutGraph) -> Result<Layering, LayoutError> {
    let n = graph.nodes.len();
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for &(s, t) in &graph.edges {
        for v in [s, t] {
            if v >= n {
                return Err(LayoutError::BadEdge(v));
            }
        }
        if s == t {
            return Err(LayoutError::Cycle);
        }
        preds[t].push(s);
        succs[s].push(t);
    }
    let mut indegree: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut queue: std::collections::VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut layer = vec![0usize; n];
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for &w in &succs[v] {
            layer[w] = layer[w].max(layer[v] + 1);
            indegree[w] -= 1;
            if indegree[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if seen != n {
        return Err(LayoutError::Cycle);
    }

    let mut nodes = graph.nodes.clone();
    let mut edges = Vec::new();
    let mut chains = Vec::with_capacity(graph.edges.len());
    for (ei, &(s, t)) in graph.edges.iter().enumerate() {
        let mut chain = vec![s];
        let mut prev = s;
        for (k, l) in (layer[s] + 1..layer[t]).enumerate() {
            let d = nodes.len();
            nodes.push(LayoutNode {
                id: format!("~{}>{}#{ei}.{k}", graph.nodes[s].id, graph.nodes[t].id),
                label: String::new(),
                shape: Shape::Dummy,
            });
            layer.push(l);
            edges.push((prev, d));
            chain.push(d);
            prev = d;
        }
        edges.push((prev, t));
        chain.push(t);
        chains.push(chain);
    }
    Ok(Layering {
        name: graph.name.clone(),
        nodes,
        layer,
        edges,
        chains,
        real_count: n,
    })
}
