//! Community detection, walk generation and skip-gram training chained into
//! one call.

use log::info;

use crate::community::{louvain, Communities, LouvainConfig, Partition};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::skipgram::{init_embeddings, train, train_from, EmbeddingModel, NoiseDistribution, TrainConfig};
use crate::walker::{generate_corpus, WalkConfig, WalkCorpus, Walker};

#[derive(Clone, Debug)]
pub struct EmbedConfig {
    pub dim: usize,
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub louvain: LouvainConfig,
    /// Threads for walk generation; training uses `train.workers`.
    pub workers: usize,
}

impl EmbedConfig {
    pub fn classification() -> Self {
        EmbedConfig {
            dim: 128,
            walk: WalkConfig::classification(),
            train: TrainConfig::default(),
            louvain: LouvainConfig::default(),
            workers: 1,
        }
    }

    pub fn link_prediction() -> Self {
        EmbedConfig {
            walk: WalkConfig::link_prediction(),
            ..Self::classification()
        }
    }

    /// Points every stage at the same master seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.walk.seed = seed;
        self.train.seed = seed;
        self.louvain.seed = seed;
        self
    }
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self::classification()
    }
}

#[derive(Clone, Debug)]
pub struct Embedding {
    /// `None` when `alpha = 0`: community jumps never happen, so detection
    /// is skipped.
    pub partition: Option<Partition>,
    pub walks: usize,
    pub model: EmbeddingModel,
}

/// Every node in its own community; the walker then never jumps.
struct NoCommunities {
    ids: Vec<u32>,
    members: Vec<Vec<NodeId>>,
}

impl NoCommunities {
    fn new(n: usize) -> Self {
        NoCommunities {
            ids: (0..n as u32).collect(),
            members: (0..n).map(|u| vec![NodeId::from(u)]).collect(),
        }
    }
}

impl Communities for NoCommunities {
    fn communities_of(&self, u: NodeId) -> &[u32] {
        std::slice::from_ref(&self.ids[u.index()])
    }

    fn members(&self, c: u32) -> &[NodeId] {
        &self.members[c as usize]
    }
}

/// Louvain partition, or `None` when `alpha = 0` makes it irrelevant.
pub fn detect_communities(g: &Graph, config: &EmbedConfig) -> Result<Option<Partition>> {
    if config.walk.alpha == 0.0 {
        return Ok(None);
    }
    let partition = louvain(g, &config.louvain)?;
    info!(
        "louvain: {} communities, modularity {:.6}",
        partition.community_count(),
        partition.modularity()
    );
    Ok(Some(partition))
}

/// Walks over `partition`, or over singleton communities when it is absent.
pub fn walk_corpus(g: &Graph, partition: Option<&Partition>, config: &EmbedConfig) -> Result<WalkCorpus> {
    let corpus = match partition {
        Some(p) => generate_corpus(g, p, &config.walk, config.workers)?,
        None => generate_corpus(g, &NoCommunities::new(g.node_count()), &config.walk, config.workers)?,
    };
    log_corpus(&corpus);
    Ok(corpus)
}

fn walks_from(
    g: &Graph,
    partition: Option<&Partition>,
    config: &EmbedConfig,
    starts: &[NodeId],
) -> Result<WalkCorpus> {
    let corpus = match partition {
        Some(p) => Walker::new(g, p, config.walk.clone())?.corpus_from(starts, config.workers)?,
        None => {
            let none = NoCommunities::new(g.node_count());
            Walker::new(g, &none, config.walk.clone())?.corpus_from(starts, config.workers)?
        }
    };
    log_corpus(&corpus);
    Ok(corpus)
}

fn log_corpus(corpus: &WalkCorpus) {
    info!(
        "walks: {} walks, {} tokens",
        corpus.len(),
        corpus.token_count()
    );
}

pub fn train_model(node_count: usize, corpus: &WalkCorpus, config: &EmbedConfig) -> Result<EmbeddingModel> {
    let model = init_embeddings(node_count, config.dim, config.train.seed)?;
    train(corpus, &config.train, model)
}

pub fn build_corpus(g: &Graph, config: &EmbedConfig) -> Result<(Option<Partition>, WalkCorpus)> {
    let partition = detect_communities(g, config)?;
    let corpus = walk_corpus(g, partition.as_ref(), config)?;
    Ok((partition, corpus))
}

pub fn embed_graph(g: &Graph, config: &EmbedConfig) -> Result<Embedding> {
    config.walk.validate()?;
    config.train.validate()?;
    let (partition, corpus) = build_corpus(g, config)?;
    let model = train_model(g.node_count(), &corpus, config)?;
    Ok(Embedding {
        partition,
        walks: corpus.len(),
        model,
    })
}

/// Community for each node of `g` beyond the `previous` partition: the
/// community holding most incident weight among already placed neighbours,
/// lowest id on ties, or a fresh singleton when none is placed. New nodes
/// are placed in id order, so chains of new nodes follow their anchors.
fn extend_partition(g: &Graph, previous: &Partition) -> Result<Partition> {
    let mut assignment = previous.assignment().to_vec();
    let mut next_id = previous.community_count() as u32;
    for u in g.nodes().skip(assignment.len()) {
        let mut pull: Vec<(u32, f64)> = Vec::new();
        for (v, w) in g.adjacency(u) {
            if let Some(&c) = assignment.get(v.index()) {
                match pull.iter_mut().find(|(id, _)| *id == c) {
                    Some(entry) => entry.1 += w,
                    None => pull.push((c, w)),
                }
            }
        }
        let best = pull
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|&(c, _)| c);
        assignment.push(best.unwrap_or_else(|| {
            next_id += 1;
            next_id - 1
        }));
    }
    Partition::from_assignment(g, &assignment)
}

/// Embeds nodes appended to the graph `previous` was trained on (see
/// [`Graph::append`]). Walks start only from the new nodes and every existing
/// vector, input and output, stays fixed, so old coordinates remain valid.
pub fn embed_appended(g: &Graph, previous: &Embedding, config: &EmbedConfig) -> Result<Embedding> {
    config.walk.validate()?;
    config.train.validate()?;
    let old = previous.model.node_count();
    if g.node_count() < old {
        return Err(Error::config(format!(
            "graph has {} nodes but the embedding already covers {old}",
            g.node_count()
        )));
    }
    let partition = match &previous.partition {
        Some(p) if config.walk.alpha > 0.0 => Some(extend_partition(g, p)?),
        _ => detect_communities(g, config)?,
    };
    let starts: Vec<NodeId> = g.nodes().skip(old).collect();
    let corpus = walks_from(g, partition.as_ref(), config, &starts)?;
    let model = previous.model.clone().with_rows(g.node_count(), config.train.seed)?;
    // A walk visits nodes in proportion to their degree, so degree stands in
    // for the unigram counts of a full corpus.
    let degrees: Vec<f64> = g.nodes().map(|u| g.weighted_degree(u)).collect();
    let noise = NoiseDistribution::from_counts(&degrees);
    let model = train_from(&corpus, &config.train, model, old, noise)?;
    Ok(Embedding {
        partition,
        walks: corpus.len(),
        model,
    })
}
