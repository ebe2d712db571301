//! Community-aware random walks.
//!
//! At every step a uniform `r` is drawn. With probability `alpha` the walk
//! jumps to a uniformly chosen member of the current node's communities
//! (excluding the node itself); otherwise it follows a weight-proportional
//! out-edge. `alpha = 0` never draws `r` and reduces to a plain weighted
//! random walk.
//!
//! When the chosen step has no candidate (a node without out-edges, or a
//! community with no other member) the walk backtracks: it scans the path
//! from the tail for the last node with a neighbour not yet on the path and
//! steps from there to one of those fresh neighbours. If no such node exists
//! the walk ends early.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rayon::prelude::*;

use crate::community::Communities;
use crate::error::{Error, Result};
use crate::graph::{AliasSampler, Graph, NodeId};
use crate::rng::{stream, Domain, StreamRng};

/// How neighbour steps treat nodes already on the path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StepPolicy {
    /// Any out-neighbour may be taken, revisits included.
    #[default]
    Revisit,
    /// Neighbour steps only go to nodes not yet on the path; a node whose
    /// neighbours are all visited triggers backtracking.
    SelfAvoiding,
}

#[derive(Clone, Debug)]
pub struct WalkConfig {
    /// Probability of a community jump at each step.
    pub alpha: f64,
    /// Maximum number of nodes in a walk.
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub seed: u64,
    pub policy: StepPolicy,
}

impl WalkConfig {
    pub const CLASSIFICATION_ALPHA: f64 = 0.2;
    pub const LINK_PREDICTION_ALPHA: f64 = 0.15;

    pub fn classification() -> Self {
        WalkConfig {
            alpha: Self::CLASSIFICATION_ALPHA,
            walk_length: 80,
            walks_per_node: 10,
            seed: 0,
            policy: StepPolicy::Revisit,
        }
    }

    pub fn link_prediction() -> Self {
        WalkConfig {
            alpha: Self::LINK_PREDICTION_ALPHA,
            ..Self::classification()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.walk_length == 0 {
            return Err(Error::config("walk length must be at least 1"));
        }
        if self.walks_per_node == 0 {
            return Err(Error::config("walks per node must be at least 1"));
        }
        Ok(())
    }
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self::classification()
    }
}

pub type Walk = Vec<NodeId>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Neighbor,
    Community,
    Backtrack,
}

pub struct Walker<'a, C: Communities + ?Sized> {
    graph: &'a Graph,
    sampler: AliasSampler,
    communities: &'a C,
    config: WalkConfig,
}

impl<'a, C: Communities + ?Sized> Walker<'a, C> {
    pub fn new(graph: &'a Graph, communities: &'a C, config: WalkConfig) -> Result<Self> {
        config.validate()?;
        Ok(Walker {
            graph,
            sampler: AliasSampler::new(graph),
            communities,
            config,
        })
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    pub fn walk<R: Rng + ?Sized>(&self, start: NodeId, rng: &mut R) -> Walk {
        self.walk_with(start, rng, &mut |_| {})
    }

    /// Walk plus the kind of every transition taken.
    pub fn walk_traced<R: Rng + ?Sized>(&self, start: NodeId, rng: &mut R) -> (Walk, Vec<StepKind>) {
        let mut kinds = Vec::new();
        let walk = self.walk_with(start, rng, &mut |k| kinds.push(k));
        (walk, kinds)
    }

    fn walk_with<R: Rng + ?Sized>(
        &self,
        start: NodeId,
        rng: &mut R,
        record: &mut dyn FnMut(StepKind),
    ) -> Walk {
        let g = self.graph;
        let alpha = self.config.alpha;
        let mut path = Vec::with_capacity(self.config.walk_length);
        path.push(start);
        let mut visited: HashSet<NodeId> = HashSet::new();
        let self_avoiding = self.config.policy == StepPolicy::SelfAvoiding;
        if self_avoiding {
            visited.insert(start);
        }
        let mut pool = Vec::new();
        let mut current = start;

        while path.len() < self.config.walk_length {
            let jump = alpha > 0.0 && rng.random::<f64>() < alpha;
            let next = if jump {
                self.community_mate(current, &mut pool, rng)
                    .map(|v| (v, StepKind::Community))
            } else if self_avoiding {
                fresh_neighbor(g, current, &visited, rng).map(|v| (v, StepKind::Neighbor))
            } else {
                self.sampler
                    .sample(g, current, rng)
                    .map(|v| (v, StepKind::Neighbor))
            };
            let (next, kind) = match next {
                Some(step) => step,
                None => match backtrack(g, &path, rng) {
                    Some(v) => (v, StepKind::Backtrack),
                    None => break,
                },
            };
            record(kind);
            path.push(next);
            if self_avoiding {
                visited.insert(next);
            }
            current = next;
        }
        path
    }

    /// Uniform member of `u`'s communities other than `u`.
    fn community_mate<R: Rng + ?Sized>(
        &self,
        u: NodeId,
        pool: &mut Vec<NodeId>,
        rng: &mut R,
    ) -> Option<NodeId> {
        match self.communities.communities_of(u) {
            [] => None,
            [c] => {
                let members = self.communities.members(*c);
                match members.binary_search(&u) {
                    Ok(pos) => {
                        if members.len() < 2 {
                            return None;
                        }
                        let i = rng.random_range(0..members.len() - 1);
                        Some(members[if i >= pos { i + 1 } else { i }])
                    }
                    Err(_) => members.choose(rng).copied(),
                }
            }
            many => {
                pool.clear();
                for &c in many {
                    pool.extend_from_slice(self.communities.members(c));
                }
                pool.sort_unstable();
                pool.dedup();
                pool.retain(|&v| v != u);
                pool.choose(rng).copied()
            }
        }
    }

    /// One walk per node per iteration; iteration `i` visits nodes in an
    /// order shuffled by its own stream. Each walk draws from a stream keyed
    /// by `(seed, iteration, start)`, so the corpus is identical for any
    /// worker count.
    pub fn corpus(&self, workers: usize) -> Result<WalkCorpus> {
        let all: Vec<NodeId> = self.graph.nodes().collect();
        self.corpus_from(&all, workers)
    }

    /// Like [`Walker::corpus`], but walks start only from `starts`. A walk
    /// from `v` is the same whichever other starts are requested.
    pub fn corpus_from(&self, starts: &[NodeId], workers: usize) -> Result<WalkCorpus> {
        if let Some(&bad) = starts.iter().find(|v| v.index() >= self.graph.node_count()) {
            self.graph.check_node(bad)?;
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::config(format!("cannot start walk workers: {e}")))?;
        let seed = self.config.seed;
        let mut corpus = WalkCorpus::default();
        for iteration in 0..self.config.walks_per_node {
            let mut order = starts.to_vec();
            order.shuffle(&mut stream(seed, Domain::Shuffle, iteration as u64, 0));
            let walks: Vec<Walk> = pool.install(|| {
                order
                    .par_iter()
                    .map(|&v| {
                        let mut rng = walk_rng(seed, iteration, v);
                        self.walk(v, &mut rng)
                    })
                    .collect()
            });
            for w in &walks {
                corpus.push(w);
            }
        }
        Ok(corpus)
    }
}

pub fn walk_rng(seed: u64, iteration: usize, start: NodeId) -> StreamRng {
    stream(seed, Domain::Walk, iteration as u64, start.0 as u64)
}

/// Weight-proportional choice among `u`'s neighbours that are not visited.
fn fresh_neighbor<R: Rng + ?Sized>(
    g: &Graph,
    u: NodeId,
    visited: &HashSet<NodeId>,
    rng: &mut R,
) -> Option<NodeId> {
    let total: f64 = g
        .adjacency(u)
        .filter(|(v, _)| !visited.contains(v))
        .map(|(_, w)| w)
        .sum();
    if total <= 0.0 {
        return None;
    }
    let mut r = rng.random::<f64>() * total;
    let mut last = None;
    for (v, w) in g.adjacency(u).filter(|(v, _)| !visited.contains(v)) {
        if r < w {
            return Some(v);
        }
        r -= w;
        last = Some(v);
    }
    last
}

/// Latest path node with an out-neighbour not on the path; returns a
/// weight-proportional step from it to one of those fresh neighbours.
fn backtrack<R: Rng + ?Sized>(g: &Graph, path: &[NodeId], rng: &mut R) -> Option<NodeId> {
    let on_path: HashSet<NodeId> = path.iter().copied().collect();
    let mut seen = HashSet::new();
    for &b in path.iter().rev() {
        if !seen.insert(b) {
            continue;
        }
        if let Some(v) = fresh_neighbor(g, b, &on_path, rng) {
            return Some(v);
        }
    }
    None
}

/// A transition in a walk that no step rule allows.
#[derive(Clone, Debug, PartialEq)]
pub struct InvalidTransition {
    pub position: usize,
    pub from: NodeId,
    pub to: NodeId,
}

/// Replays a walk against the graph and communities. Position `k` holds
/// the transition `walk[k-1] -> walk[k]`.
pub fn check_walk<C: Communities + ?Sized>(
    g: &Graph,
    communities: &C,
    walk: &[NodeId],
    max_length: usize,
) -> std::result::Result<(), InvalidTransition> {
    if walk.is_empty() || walk.len() > max_length {
        return Err(InvalidTransition {
            position: walk.len(),
            from: NodeId(u32::MAX),
            to: NodeId(u32::MAX),
        });
    }
    for k in 1..walk.len() {
        let (a, b) = (walk[k - 1], walk[k]);
        let neighbor = g.neighbors(a).contains(&b);
        let mate = a != b
            && communities
                .communities_of(a)
                .iter()
                .any(|&c| communities.members(c).binary_search(&b).is_ok());
        let backtracked = !walk[..k].contains(&b)
            && walk[..k - 1]
                .iter()
                .any(|&earlier| g.neighbors(earlier).contains(&b));
        if !(neighbor || mate || backtracked) {
            return Err(InvalidTransition {
                position: k,
                from: a,
                to: b,
            });
        }
    }
    Ok(())
}

/// Flat storage for many walks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WalkCorpus {
    nodes: Vec<NodeId>,
    offsets: Vec<usize>,
}

impl WalkCorpus {
    pub fn push(&mut self, walk: &[NodeId]) {
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        self.nodes.extend_from_slice(walk);
        self.offsets.push(self.nodes.len());
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total node occurrences over all walks.
    pub fn token_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn get(&self, i: usize) -> &[NodeId] {
        &self.nodes[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[NodeId]> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn tokens(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Walk dump: one walk per line, space-separated original ids.
    pub fn write<W: std::io::Write>(&self, g: &Graph, mut out: W) -> Result<()> {
        for walk in self.iter() {
            let mut first = true;
            for &v in walk {
                if !first {
                    out.write_all(b" ")?;
                }
                out.write_all(g.label(v).as_bytes())?;
                first = false;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Builds the sampler and runs [`Walker::corpus`].
pub fn generate_corpus<C: Communities + ?Sized>(
    g: &Graph,
    communities: &C,
    config: &WalkConfig,
    workers: usize,
) -> Result<WalkCorpus> {
    Walker::new(g, communities, config.clone())?.corpus(workers)
}
