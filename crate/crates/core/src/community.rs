//! Louvain modularity maximization.
//!
//! Modularity is always evaluated on the undirected reading of the graph:
//! a directed edge `u -> v` contributes to both endpoints' degrees exactly
//! like an undirected one. Self-loops contribute `A_ii = 2w`, which keeps
//! `sum_j A_ij = k_i`.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};
use crate::rng::{stream, Domain};

pub type CommunityId = u32;

/// Read access to node/community membership, shared by partitions and
/// overlapping covers.
pub trait Communities: Sync {
    fn communities_of(&self, u: NodeId) -> &[CommunityId];
    /// Sorted member list of community `c`.
    fn members(&self, c: CommunityId) -> &[NodeId];
}

/// Non-overlapping node-to-community assignment.
#[derive(Clone, Debug)]
pub struct Partition {
    assignment: Vec<CommunityId>,
    members: Vec<Vec<NodeId>>,
    modularity: f64,
}

impl Partition {
    /// Renumbers `assignment` densely (by first appearance in node order)
    /// and scores it against `g`.
    pub fn from_assignment(g: &Graph, assignment: &[CommunityId]) -> Result<Self> {
        if assignment.len() != g.node_count() {
            return Err(Error::config(format!(
                "assignment covers {} nodes, graph has {}",
                assignment.len(),
                g.node_count()
            )));
        }
        let mut dense = assignment.to_vec();
        let count = renumber(&mut dense);
        let mut members = vec![Vec::new(); count];
        for (u, &c) in dense.iter().enumerate() {
            members[c as usize].push(NodeId::from(u));
        }
        let modularity = modularity(g, &dense)?;
        Ok(Partition {
            assignment: dense,
            members,
            modularity,
        })
    }

    pub fn community_of(&self, u: NodeId) -> CommunityId {
        self.assignment[u.index()]
    }

    pub fn assignment(&self) -> &[CommunityId] {
        &self.assignment
    }

    pub fn community_count(&self) -> usize {
        self.members.len()
    }

    pub fn modularity(&self) -> f64 {
        self.modularity
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    /// Community sizes, largest first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.members.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

impl Communities for Partition {
    fn communities_of(&self, u: NodeId) -> &[CommunityId] {
        std::slice::from_ref(&self.assignment[u.index()])
    }

    fn members(&self, c: CommunityId) -> &[NodeId] {
        &self.members[c as usize]
    }
}

/// Overlapping membership: a node may sit in several communities.
#[derive(Clone, Debug)]
pub struct Cover {
    of_node: Vec<Vec<CommunityId>>,
    members: Vec<Vec<NodeId>>,
}

impl Cover {
    /// Builds a cover from community member lists over `node_count` nodes.
    pub fn new(node_count: usize, communities: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut of_node = vec![Vec::new(); node_count];
        let mut members = Vec::with_capacity(communities.len());
        for (c, mut list) in communities.into_iter().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &u in &list {
                if u.index() >= node_count {
                    return Err(Error::UnknownNode {
                        node: u.index(),
                        node_count,
                    });
                }
                of_node[u.index()].push(c as CommunityId);
            }
            members.push(list);
        }
        Ok(Cover { of_node, members })
    }
}

impl Communities for Cover {
    fn communities_of(&self, u: NodeId) -> &[CommunityId] {
        &self.of_node[u.index()]
    }

    fn members(&self, c: CommunityId) -> &[NodeId] {
        &self.members[c as usize]
    }
}

/// Relabels communities to `0..k` in order of first appearance; returns `k`.
pub fn renumber(assignment: &mut [CommunityId]) -> usize {
    let mut map: HashMap<CommunityId, CommunityId> = HashMap::new();
    for c in assignment.iter_mut() {
        let next = map.len() as CommunityId;
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}

/// `Q = 1/(2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)`, computed per
/// community as `sum_c [In_c / 2m - (Tot_c / 2m)^2]`.
pub fn modularity(g: &Graph, assignment: &[CommunityId]) -> Result<f64> {
    let m = g.total_weight();
    if m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    if assignment.len() != g.node_count() {
        return Err(Error::config("assignment does not cover every node"));
    }
    let communities = assignment.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut internal = vec![0.0; communities];
    let mut total = vec![0.0; communities];
    for e in g.edges() {
        let (cu, cv) = (
            assignment[e.source.index()] as usize,
            assignment[e.target.index()] as usize,
        );
        total[cu] += e.weight;
        total[cv] += e.weight;
        if cu == cv {
            internal[cu] += 2.0 * e.weight;
        }
    }
    let two_m = 2.0 * m;
    Ok(internal
        .iter()
        .zip(&total)
        .map(|(&inside, &tot)| inside / two_m - (tot / two_m) * (tot / two_m))
        .sum())
}

#[derive(Clone, Debug)]
pub struct LouvainConfig {
    pub max_passes: usize,
    pub min_gain: f64,
    pub seed: u64,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            max_passes: 20,
            min_gain: 1e-7,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LouvainResult {
    pub partition: Partition,
    /// Modularity on the input graph: the singleton start, then after each
    /// pass.
    pub pass_modularity: Vec<f64>,
}

/// Gains smaller than this are treated as ties or noise.
const EPS: f64 = 1e-12;

pub fn louvain(g: &Graph, config: &LouvainConfig) -> Result<Partition> {
    Ok(louvain_with_history(g, config)?.partition)
}

pub fn louvain_with_history(g: &Graph, config: &LouvainConfig) -> Result<LouvainResult> {
    if g.total_weight() <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let base = g.to_undirected();
    let mut rng = stream(config.seed, Domain::Louvain, 0, 0);

    // Community of every original node, expressed as a node of `level`.
    let mut node_comm: Vec<CommunityId> = (0..base.node_count() as CommunityId).collect();
    let mut level = base.clone();
    let mut history = vec![modularity(&base, &node_comm)?];

    for _ in 0..config.max_passes {
        let mut assignment: Vec<CommunityId> = (0..level.node_count() as CommunityId).collect();
        let gain = local_moving_pass(&level, &mut assignment, &mut rng);
        let count = renumber(&mut assignment);
        if count == level.node_count() {
            break;
        }
        for c in node_comm.iter_mut() {
            *c = assignment[*c as usize];
        }
        history.push(modularity(&base, &node_comm)?);
        level = aggregate_graph(&level, &assignment)?;
        if gain < config.min_gain {
            break;
        }
    }

    Ok(LouvainResult {
        partition: Partition::from_assignment(&base, &node_comm)?,
        pass_modularity: history,
    })
}

/// One Louvain local-moving phase on an undirected working graph. Nodes are
/// swept in a shuffled order until a full sweep moves nothing. Returns the
/// total modularity gain.
pub fn local_moving_pass<R: Rng + ?Sized>(
    working: &Graph,
    assignment: &mut [CommunityId],
    rng: &mut R,
) -> f64 {
    local_moving(working, assignment, rng, &mut |_, _| {})
}

/// `on_move(assignment, delta_q)` fires after every accepted move.
fn local_moving<R: Rng + ?Sized>(
    working: &Graph,
    assignment: &mut [CommunityId],
    rng: &mut R,
    on_move: &mut dyn FnMut(&[CommunityId], f64),
) -> f64 {
    let n = working.node_count();
    let m = working.total_weight();
    if n == 0 || m <= 0.0 {
        return 0.0;
    }
    debug_assert!(assignment.iter().all(|&c| (c as usize) < n));

    let mut tot = vec![0.0; n];
    for u in working.nodes() {
        tot[assignment[u.index()] as usize] += working.weighted_degree(u);
    }

    let mut order: Vec<NodeId> = working.nodes().collect();
    order.shuffle(rng);

    let mut link = vec![0.0; n];
    let mut touched: Vec<CommunityId> = Vec::new();
    let mut total_gain = 0.0;

    loop {
        let mut moved = false;
        for &u in &order {
            let current = assignment[u.index()];
            let k = working.weighted_degree(u);

            touched.push(current);
            for (v, w) in working.adjacency(u) {
                if v == u {
                    continue;
                }
                let c = assignment[v.index()];
                if link[c as usize] == 0.0 {
                    touched.push(c);
                }
                link[c as usize] += w;
            }

            tot[current as usize] -= k;
            // Placing u into c scores link(u, c)/m - k * Tot_c / (2 m^2).
            let gain = |c: CommunityId, link: &[f64], tot: &[f64]| {
                link[c as usize] / m - k * tot[c as usize] / (2.0 * m * m)
            };
            let current_gain = gain(current, &link, &tot);
            touched.sort_unstable();
            touched.dedup();
            let mut best = current;
            let mut best_gain = current_gain;
            for &c in &touched {
                let g = gain(c, &link, &tot);
                if g > best_gain + EPS {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best as usize] += k;

            for &c in &touched {
                link[c as usize] = 0.0;
            }
            touched.clear();

            if best != current {
                assignment[u.index()] = best;
                let delta = best_gain - current_gain;
                total_gain += delta;
                moved = true;
                on_move(assignment, delta);
            }
        }
        if !moved {
            break;
        }
    }
    total_gain
}

/// Collapses each community into one node. Inter-community weights are
/// summed; intra-community weight becomes a self-loop, which the degree
/// convention counts twice. Aggregate node `i` is the `i`-th distinct
/// community id in ascending order.
pub fn aggregate_graph(working: &Graph, assignment: &[CommunityId]) -> Result<Graph> {
    if assignment.len() != working.node_count() {
        return Err(Error::config("assignment does not cover every node"));
    }
    let mut ids: Vec<CommunityId> = assignment.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let dense = |c: CommunityId| ids.binary_search(&c).expect("id collected above") as u32;

    let mut weights: HashMap<(u32, u32), f64> = HashMap::new();
    for e in working.edges() {
        let (a, b) = (
            dense(assignment[e.source.index()]),
            dense(assignment[e.target.index()]),
        );
        *weights.entry((a.min(b), a.max(b))).or_insert(0.0) += e.weight;
    }
    let mut edges: Vec<Edge> = weights
        .into_iter()
        .map(|((a, b), w)| Edge::new(NodeId(a), NodeId(b), w))
        .collect();
    edges.sort_by_key(|e| (e.source, e.target));
    Graph::from_edges(ids.len(), false, edges)
}
