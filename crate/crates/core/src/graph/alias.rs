use rand::Rng;

use super::{Graph, NodeId};

/// Walker/Vose alias table over a fixed discrete distribution.
#[derive(Clone, Debug)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

/// Fills `prob`/`alias` (same length as `weights`) with Vose's construction.
/// Entries are local indices into `weights`.
fn build(weights: &[f64], prob: &mut [f64], alias: &mut [u32]) {
    let n = weights.len();
    if n == 0 {
        return;
    }
    let total: f64 = weights.iter().sum();
    let mut small = Vec::with_capacity(n);
    let mut large = Vec::with_capacity(n);
    for (i, &w) in weights.iter().enumerate() {
        prob[i] = w * n as f64 / total;
        alias[i] = i as u32;
        if prob[i] < 1.0 {
            small.push(i);
        } else {
            large.push(i);
        }
    }
    while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
        small.pop();
        alias[s] = l as u32;
        prob[l] -= 1.0 - prob[s];
        if prob[l] < 1.0 {
            large.pop();
            small.push(l);
        }
    }
    // Leftovers are 1 up to rounding.
    for i in small.into_iter().chain(large) {
        prob[i] = 1.0;
    }
}

#[inline]
fn draw<R: Rng + ?Sized>(prob: &[f64], alias: &[u32], rng: &mut R) -> usize {
    let i = rng.random_range(0..prob.len());
    if rng.random::<f64>() < prob[i] {
        i
    } else {
        alias[i] as usize
    }
}

impl AliasTable {
    /// `weights` must be non-empty, non-negative and not all zero.
    pub fn new(weights: &[f64]) -> Self {
        assert!(
            weights.iter().any(|&w| w > 0.0),
            "alias table needs a positive weight"
        );
        let mut prob = vec![0.0; weights.len()];
        let mut alias = vec![0; weights.len()];
        build(weights, &mut prob, &mut alias);
        AliasTable { prob, alias }
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        draw(&self.prob, &self.alias, rng)
    }
}

/// Per-node alias tables laid out parallel to the graph's adjacency arrays.
#[derive(Clone, Debug)]
pub struct AliasSampler {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasSampler {
    pub fn new(g: &Graph) -> Self {
        let slots = g.entry_slots();
        let mut prob = vec![0.0; slots];
        let mut alias = vec![0; slots];
        for u in g.nodes() {
            let range = g.entry_range(u);
            build(g.neighbor_weights(u), &mut prob[range.clone()], &mut alias[range]);
        }
        AliasSampler { prob, alias }
    }

    /// Weight-proportional neighbour of `u`, or `None` when `u` has no
    /// out-entries. Parallel edges accumulate probability.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, g: &Graph, u: NodeId, rng: &mut R) -> Option<NodeId> {
        let range = g.entry_range(u);
        if range.is_empty() {
            return None;
        }
        let local = draw(&self.prob[range.clone()], &self.alias[range], rng);
        Some(g.neighbors(u)[local])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::rng::{stream, Domain};

    #[test]
    fn single_neighbor_always_drawn() {
        let g = Graph::from_edges(2, false, vec![Edge::unit(0, 1)]).unwrap();
        let s = AliasSampler::new(&g);
        let mut rng = stream(1, Domain::Walk, 0, 0);
        for _ in 0..100 {
            assert_eq!(s.sample(&g, NodeId(0), &mut rng), Some(NodeId(1)));
        }
    }

    #[test]
    fn isolated_node_has_no_sample() {
        let g = Graph::from_edges(3, false, vec![Edge::unit(0, 1)]).unwrap();
        let s = AliasSampler::new(&g);
        let mut rng = stream(1, Domain::Walk, 0, 0);
        assert_eq!(s.sample(&g, NodeId(2), &mut rng), None);
    }

    #[test]
    fn three_to_one_ratio() {
        // Exact ratio 3/4; 10^5 draws give sd ~ 0.00137.
        let g = Graph::from_edges(3, false, vec![Edge::new(0, 1, 3.0), Edge::new(0, 2, 1.0)])
            .unwrap();
        let s = AliasSampler::new(&g);
        let mut rng = stream(3, Domain::Walk, 0, 0);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| s.sample(&g, NodeId(0), &mut rng) == Some(NodeId(1)))
            .count();
        let freq = hits as f64 / draws as f64;
        assert!((freq - 0.75).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn parallel_edges_accumulate() {
        // 1 reached through two unit edges, 2 through one: 2/3 vs 1/3.
        let g = Graph::from_edges(
            3,
            false,
            vec![Edge::unit(0, 1), Edge::unit(0, 2), Edge::unit(0, 1)],
        )
        .unwrap();
        let s = AliasSampler::new(&g);
        let mut rng = stream(5, Domain::Walk, 0, 0);
        let draws = 60_000;
        let hits = (0..draws)
            .filter(|_| s.sample(&g, NodeId(0), &mut rng) == Some(NodeId(1)))
            .count();
        let freq = hits as f64 / draws as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn table_reproduces_distribution() {
        let weights = [0.1, 0.0, 2.0, 0.4, 1.5];
        let table = AliasTable::new(&weights);
        let total: f64 = weights.iter().sum();
        // Exact probability mass of each outcome implied by the table.
        let n = weights.len() as f64;
        let mut mass = vec![0.0; weights.len()];
        for i in 0..weights.len() {
            mass[i] += table.prob[i] / n;
            mass[table.alias[i] as usize] += (1.0 - table.prob[i]) / n;
        }
        for (m, w) in mass.iter().zip(weights) {
            assert!((m - w / total).abs() < 1e-12);
        }
    }
}
