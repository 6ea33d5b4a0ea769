use super::Layering;

/// Barycenter sweeps: down, up, down, up.
pub const SWEEPS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    pub layering: Layering,
    /// Node indices per layer, left to right.
    pub layers: Vec<Vec<usize>>,
    pub initial_crossings: usize,
    pub crossings: usize,
}

impl Ordering {
    /// Position of every node within its layer.
    pub fn positions(&self) -> Vec<usize> {
        positions(&self.layers, self.layering.nodes.len())
    }
}

fn positions(layers: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut pos = vec![0; n];
    for layer in layers {
        for (i, &v) in layer.iter().enumerate() {
            pos[v] = i;
        }
    }
    pos
}

/// Edge crossings between adjacent layers, counted as inversions with a
/// Fenwick tree. Every edge must span exactly one layer.
pub fn count_crossings(layers: &[Vec<usize>], edges: &[(usize, usize)], layer_of: &[usize]) -> usize {
    let n = layer_of.len();
    let pos = positions(layers, n);
    let mut total = 0;
    for l in 0..layers.len().saturating_sub(1) {
        let mut pairs: Vec<(usize, usize)> = edges
            .iter()
            .filter(|&&(s, _)| layer_of[s] == l)
            .map(|&(s, t)| (pos[s], pos[t]))
            .collect();
        pairs.sort_unstable();
        let width = layers[l + 1].len();
        let mut tree = vec![0usize; width + 1];
        for (seen, &(_, t)) in pairs.iter().enumerate() {
            // earlier edges ending strictly right of t cross this one
            let mut i = t + 1;
            let mut not_greater = 0;
            while i > 0 {
                not_greater += tree[i];
                i -= i & i.wrapping_neg();
            }
            total += seen - not_greater;
            let mut i = t + 1;
            while i <= width {
                tree[i] += 1;
                i += i & i.wrapping_neg();
            }
        }
    }
    total
}

fn sweep(layers: &mut [Vec<usize>], neighbours: &[Vec<usize>], range: impl Iterator<Item = usize>, n: usize) {
    for l in range {
        let pos = positions(layers, n);
        let mut keyed: Vec<(f64, usize)> = layers[l]
            .iter()
            .map(|&v| {
                let ns = &neighbours[v];
                let key = if ns.is_empty() {
                    pos[v] as f64
                } else {
                    ns.iter().map(|&u| pos[u] as f64).sum::<f64>() / ns.len() as f64
                };
                (key, v)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        layers[l] = keyed.into_iter().map(|(_, v)| v).collect();
    }
}

/// Reduce crossings from the id-sorted order with [`SWEEPS`] barycenter
/// sweeps; a sweep that increases the crossing count is discarded.
pub fn order_layers(layering: Layering) -> Ordering {
    let n = layering.nodes.len();
    let depth = layering.layer_count();
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); depth];
    for v in 0..n {
        layers[layering.layer[v]].push(v);
    }
    for layer in &mut layers {
        layer.sort_by(|&a, &b| layering.nodes[a].id.cmp(&layering.nodes[b].id));
    }
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for &(s, t) in &layering.edges {
        preds[t].push(s);
        succs[s].push(t);
    }
    let count = |layers: &[Vec<usize>]| count_crossings(layers, &layering.edges, &layering.layer);
    let initial = count(&layers);
    let mut best = initial;
    for i in 0..SWEEPS {
        let mut candidate = layers.clone();
        if i % 2 == 0 {
            sweep(&mut candidate, &preds, 1..depth, n);
        } else {
            sweep(&mut candidate, &succs, (0..depth.saturating_sub(1)).rev(), n);
        }
        let c = count(&candidate);
        if c <= best {
            best = c;
            layers = candidate;
        }
    }
    Ordering {
        layering,
        layers,
        initial_crossings: initial,
        crossings: best,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenwick_counts_simple_cross() {
        // a0->b1, a1->b0 cross once
        let layers = vec![vec![0, 1], vec![2, 3]];
        let layer_of = vec![0, 0, 1, 1];
        assert_eq!(count_crossings(&layers, &[(0, 3), (1, 2)], &layer_of), 1);
        assert_eq!(count_crossings(&layers, &[(0, 2), (1, 3)], &layer_of), 0);
        // shared endpoints never cross
        assert_eq!(count_crossings(&layers, &[(0, 2), (0, 3), (1, 3)], &layer_of), 0);
    }
}
