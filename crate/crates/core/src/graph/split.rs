use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::{write_edge_list, Graph, NodeId};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

pub type NodePair = (NodeId, NodeId);

/// Link-prediction split: the residual graph keeps every node of the
/// original; removed edges and sampled non-edges are the test pairs.
#[derive(Clone, Debug)]
pub struct EdgeSplit {
    pub residual: Graph,
    pub removed_edges: Vec<NodePair>,
    pub negative_edges: Vec<NodePair>,
}

impl EdgeSplit {
    /// Writes the residual edge list and the positive/negative test pairs in
    /// edge-list format.
    pub fn write_files(
        &self,
        residual: impl AsRef<Path>,
        positives: impl AsRef<Path>,
        negatives: impl AsRef<Path>,
    ) -> Result<()> {
        write_edge_list(&self.residual, BufWriter::new(File::create(residual)?))?;
        for (path, pairs) in [
            (positives.as_ref(), &self.removed_edges),
            (negatives.as_ref(), &self.negative_edges),
        ] {
            let mut out = BufWriter::new(File::create(path)?);
            for &(u, v) in pairs {
                writeln!(out, "{} {}", self.residual.label(u), self.residual.label(v))?;
            }
            out.flush()?;
        }
        Ok(())
    }
}

#[inline]
fn key(u: NodeId, v: NodeId) -> (u32, u32) {
    if u <= v {
        (u.0, v.0)
    } else {
        (v.0, u.0)
    }
}

/// Draws node pairs that are not edges of a fixed undirected graph.
pub struct NonEdgeSampler {
    node_count: usize,
    edges: HashSet<(u32, u32)>,
}

impl NonEdgeSampler {
    pub fn new(g: &Graph) -> Self {
        let edges = g
            .edges()
            .iter()
            .filter(|e| !e.is_loop())
            .map(|e| key(e.source, e.target))
            .collect();
        NonEdgeSampler {
            node_count: g.node_count(),
            edges,
        }
    }

    pub fn is_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains(&key(u, v))
    }

    /// Samples `count` distinct unordered non-edges without self-loops,
    /// skipping anything in `exclude` (pairs given as `(min, max)`).
    pub fn sample<R: Rng + ?Sized>(
        &self,
        count: usize,
        exclude: &HashSet<(u32, u32)>,
        rng: &mut R,
    ) -> Result<Vec<NodePair>> {
        let n = self.node_count;
        let all_pairs = n * n.saturating_sub(1) / 2;
        let blocked = self.edges.len()
            + exclude
                .iter()
                .filter(|p| p.0 != p.1 && !self.edges.contains(p))
                .count();
        let available = all_pairs - blocked.min(all_pairs);
        if count > available {
            return Err(Error::TooDense {
                needed: count,
                available,
            });
        }

        if 2 * count > available {
            let mut pool: Vec<(u32, u32)> = (0..n as u32)
                .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
                .filter(|p| !self.edges.contains(p) && !exclude.contains(p))
                .collect();
            let (picked, _) = pool.partial_shuffle(rng, count);
            return Ok(picked
                .iter()
                .map(|&(u, v)| (NodeId(u), NodeId(v)))
                .collect());
        }

        let mut drawn = HashSet::with_capacity(count);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let u = NodeId(rng.random_range(0..n as u32));
            let v = NodeId(rng.random_range(0..n as u32));
            if u == v {
                continue;
            }
            let k = key(u, v);
            if self.edges.contains(&k) || exclude.contains(&k) || !drawn.insert(k) {
                continue;
            }
            out.push((NodeId(k.0), NodeId(k.1)));
        }
        Ok(out)
    }
}

/// Removes `floor(removal_fraction * |E|)` uniformly chosen edges (no
/// connectivity constraint) and draws the same number of non-edges of the
/// original graph.
pub fn split_edges(g: &Graph, removal_fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if g.is_directed() {
        return Err(Error::config("edge splitting needs an undirected graph"));
    }
    if !(removal_fraction > 0.0 && removal_fraction < 1.0) {
        return Err(Error::config(format!(
            "removal fraction {removal_fraction} outside (0, 1)"
        )));
    }
    let remove = (removal_fraction * g.edge_count() as f64).floor() as usize;
    if remove == 0 {
        return Err(Error::config(format!(
            "removing {removal_fraction} of {} edges removes nothing",
            g.edge_count()
        )));
    }

    let mut rng = stream(seed, Domain::Split, 0, 0);
    let mut chosen = index::sample(&mut rng, g.edge_count(), remove).into_vec();
    chosen.sort_unstable();

    let mut removed_edges = Vec::with_capacity(remove);
    let mut residual_edges = Vec::with_capacity(g.edge_count() - remove);
    let mut next = chosen.iter().peekable();
    for (i, e) in g.edges().iter().enumerate() {
        if next.peek() == Some(&&i) {
            next.next();
            removed_edges.push((e.source, e.target));
        } else {
            residual_edges.push(*e);
        }
    }

    let negative_edges = NonEdgeSampler::new(g).sample(remove, &HashSet::new(), &mut rng)?;
    Ok(EdgeSplit {
        residual: g.with_edges(residual_edges)?,
        removed_edges,
        negative_edges,
    })
}
