//! Immutable weighted adjacency in compressed sparse row form.
//!
//! Node ids are dense `u32` indices; original string ids live in a sidecar
//! table so hot loops never touch a hash map. Parallel edges stay separate
//! adjacency entries, so weight-proportional sampling naturally favours
//! neighbours joined by several edges.
//!
//! [`Graph::append`] grows a graph without touching its base arrays: the
//! adjacency of new nodes, and of old nodes that gain edges, is rebuilt in a
//! small overflow CSR that lookups consult first.

mod alias;
mod io;
mod split;

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use alias::{AliasSampler, AliasTable};
pub use io::{load_edge_list, read_edge_list_file, write_edge_list, LoadOptions};
pub use split::{split_edges, EdgeSplit, NonEdgeSampler};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub weight: f64,
}

impl Edge {
    pub fn new(source: impl Into<NodeId>, target: impl Into<NodeId>, weight: f64) -> Self {
        Edge {
            source: source.into(),
            target: target.into(),
            weight,
        }
    }

    pub fn unit(source: impl Into<NodeId>, target: impl Into<NodeId>) -> Self {
        Self::new(source, target, 1.0)
    }

    pub fn is_loop(&self) -> bool {
        self.source == self.target
    }
}

/// Original node names and their dense ids.
#[derive(Clone, Debug, Default)]
pub struct NodeLabels {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeLabels {
    pub fn numbered(count: usize) -> Self {
        let names: Vec<String> = (0..count).map(|i| i.to_string()).collect();
        Self::from_names(names)
    }

    pub fn from_names(names: Vec<String>) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), NodeId::from(i)))
            .collect();
        NodeLabels { names, index }
    }

    /// Returns the id for `name`, assigning the next dense id on first sight.
    pub fn intern(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = NodeId::from(self.names.len());
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.index()]
    }

    pub fn get(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }
}

#[derive(Clone, Debug, Default)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<f64>,
}

impl Csr {
    /// Adjacency of `rows` nodes; `segments(i)` yields row `i`'s entries.
    fn build<I>(rows: usize, mut segments: impl FnMut(usize) -> I) -> Csr
    where
        I: Iterator<Item = (NodeId, f64)>,
    {
        let mut csr = Csr {
            offsets: Vec::with_capacity(rows + 1),
            ..Csr::default()
        };
        csr.offsets.push(0);
        for i in 0..rows {
            for (v, w) in segments(i) {
                csr.targets.push(v);
                csr.weights.push(w);
            }
            csr.offsets.push(csr.targets.len());
        }
        csr
    }

    #[inline]
    fn range(&self, row: usize) -> Range<usize> {
        self.offsets[row]..self.offsets[row + 1]
    }
}

/// Rebuilt adjacency rows for nodes added or extended after the base CSR
/// was built.
#[derive(Clone, Debug)]
struct Overflow {
    /// Overflow row of every node, `NO_ROW` when the base row is current.
    row: Vec<u32>,
    csr: Csr,
}

const NO_ROW: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct Graph {
    directed: bool,
    base: Arc<Csr>,
    overflow: Option<Arc<Overflow>>,
    degrees: Vec<f64>,
    edges: Vec<Edge>,
    total_weight: f64,
    labels: NodeLabels,
}

impl Graph {
    /// Builds a graph over `node_count` nodes labelled `"0"`, `"1"`, ...
    pub fn from_edges(node_count: usize, directed: bool, edges: Vec<Edge>) -> Result<Self> {
        Self::with_labels(NodeLabels::numbered(node_count), directed, edges)
    }

    pub fn with_labels(labels: NodeLabels, directed: bool, edges: Vec<Edge>) -> Result<Self> {
        let n = labels.len();
        validate_edges(&edges, n)?;

        let mut counts = vec![0usize; n + 1];
        for e in &edges {
            counts[e.source.index() + 1] += 1;
            if !directed && !e.is_loop() {
                counts[e.target.index() + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let total = offsets[n];
        let mut cursor = offsets.clone();
        let mut targets = vec![NodeId(0); total];
        let mut weights = vec![0.0; total];
        let mut degrees = vec![0.0; n];
        let mut total_weight = 0.0;
        for e in &edges {
            let (u, v) = (e.source.index(), e.target.index());
            targets[cursor[u]] = e.target;
            weights[cursor[u]] = e.weight;
            cursor[u] += 1;
            if !directed && !e.is_loop() {
                targets[cursor[v]] = e.source;
                weights[cursor[v]] = e.weight;
                cursor[v] += 1;
            }
            add_degree(&mut degrees, e, directed);
            total_weight += e.weight;
        }

        Ok(Graph {
            directed,
            base: Arc::new(Csr {
                offsets,
                targets,
                weights,
            }),
            overflow: None,
            degrees,
            edges,
            total_weight,
            labels,
        })
    }

    /// Adds nodes `names` (ids `node_count()..`) and `edges`, which may join
    /// old and new nodes. The base adjacency is shared, not copied; only the
    /// rows of new nodes and of old nodes gaining edges are rebuilt. The
    /// result matches a graph built from scratch on the combined edge list.
    pub fn append(&self, names: &[&str], edges: Vec<Edge>) -> Result<Graph> {
        let old_n = self.node_count();
        let mut labels = self.labels.clone();
        for name in names {
            if labels.get(name).is_some() {
                return Err(Error::config(format!("node `{name}` already exists")));
            }
            labels.intern(name);
        }
        let n = labels.len();
        validate_edges(&edges, n)?;

        let mut extra: HashMap<NodeId, Vec<(NodeId, f64)>> = HashMap::new();
        let mut degrees = self.degrees.clone();
        degrees.resize(n, 0.0);
        let mut total_weight = self.total_weight;
        for e in &edges {
            extra.entry(e.source).or_default().push((e.target, e.weight));
            if !self.directed && !e.is_loop() {
                extra.entry(e.target).or_default().push((e.source, e.weight));
            }
            add_degree(&mut degrees, e, self.directed);
            total_weight += e.weight;
        }

        // Rows rebuilt so far stay in the overflow; new nodes and newly
        // extended old nodes join them.
        let mut rebuilt: Vec<NodeId> = (0..n as u32)
            .map(NodeId)
            .filter(|u| {
                u.index() >= old_n
                    || extra.contains_key(u)
                    || self.overflow.as_ref().is_some_and(|o| o.row[u.index()] != NO_ROW)
            })
            .collect();
        rebuilt.sort_unstable();
        let csr = Csr::build(rebuilt.len(), |i| {
            let u = rebuilt[i];
            let old = if u.index() < old_n {
                self.adjacency(u).collect::<Vec<_>>()
            } else {
                Vec::new()
            };
            old.into_iter()
                .chain(extra.get(&u).into_iter().flatten().copied())
        });
        let mut row = vec![NO_ROW; n];
        for (i, u) in rebuilt.iter().enumerate() {
            row[u.index()] = i as u32;
        }

        let mut all_edges = self.edges.clone();
        all_edges.extend(edges);
        Ok(Graph {
            directed: self.directed,
            base: Arc::clone(&self.base),
            overflow: Some(Arc::new(Overflow { row, csr })),
            degrees,
            edges: all_edges,
            total_weight,
            labels,
        })
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    /// Number of input edges; parallel edges count separately and undirected
    /// edges count once.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Sum of all edge weights, each undirected edge counted once.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> &NodeLabels {
        &self.labels
    }

    pub fn label(&self, u: NodeId) -> &str {
        self.labels.name(u)
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.node_count() as u32).map(NodeId)
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if u.index() < self.node_count() {
            Ok(())
        } else {
            Err(Error::UnknownNode {
                node: u.index(),
                node_count: self.node_count(),
            })
        }
    }

    #[inline]
    fn row(&self, u: NodeId) -> (&Csr, usize) {
        if let Some(o) = &self.overflow {
            let r = o.row[u.index()];
            if r != NO_ROW {
                return (&o.csr, r as usize);
            }
        }
        (&self.base, u.index())
    }

    /// Adjacency entries of `u` (out-entries when directed).
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        let (csr, r) = self.row(u);
        &csr.targets[csr.range(r)]
    }

    #[inline]
    pub fn neighbor_weights(&self, u: NodeId) -> &[f64] {
        let (csr, r) = self.row(u);
        &csr.weights[csr.range(r)]
    }

    pub fn adjacency(&self, u: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.neighbors(u)
            .iter()
            .copied()
            .zip(self.neighbor_weights(u).iter().copied())
    }

    #[inline]
    pub fn out_degree(&self, u: NodeId) -> usize {
        self.neighbors(u).len()
    }

    /// `k_u`: incident weight (out-weight when directed), undirected
    /// self-loops counted twice.
    #[inline]
    pub fn weighted_degree(&self, u: NodeId) -> f64 {
        self.degrees[u.index()]
    }

    /// Total adjacency entries across the base and overflow arrays.
    pub(crate) fn entry_slots(&self) -> usize {
        self.base.targets.len() + self.overflow.as_ref().map_or(0, |o| o.csr.targets.len())
    }

    /// `u`'s entries as a range into a single index space spanning the
    /// base arrays followed by the overflow arrays.
    #[inline]
    pub(crate) fn entry_range(&self, u: NodeId) -> Range<usize> {
        let (csr, r) = self.row(u);
        let range = csr.range(r);
        if std::ptr::eq(csr, &*self.base) {
            range
        } else {
            let shift = self.base.targets.len();
            range.start + shift..range.end + shift
        }
    }

    /// The same edge multiset read as undirected; returns a clone when the
    /// graph already is.
    pub fn to_undirected(&self) -> Graph {
        if !self.directed {
            return self.clone();
        }
        Graph::with_labels(self.labels.clone(), false, self.edges.clone())
            .expect("edges were validated on construction")
    }

    /// Same nodes and labels, different edges.
    pub fn with_edges(&self, edges: Vec<Edge>) -> Result<Graph> {
        Graph::with_labels(self.labels.clone(), self.directed, edges)
    }
}

fn validate_edges(edges: &[Edge], n: usize) -> Result<()> {
    for e in edges {
        for end in [e.source, e.target] {
            if end.index() >= n {
                return Err(Error::UnknownNode {
                    node: end.index(),
                    node_count: n,
                });
            }
        }
        if !(e.weight > 0.0 && e.weight.is_finite()) {
            return Err(Error::config(format!(
                "edge ({}, {}) has non-positive weight {}",
                e.source, e.target, e.weight
            )));
        }
    }
    Ok(())
}

fn add_degree(degrees: &mut [f64], e: &Edge, directed: bool) {
    degrees[e.source.index()] += e.weight;
    if !directed {
        // Undirected self-loops count twice towards the degree.
        degrees[e.target.index()] += e.weight;
    }
}
