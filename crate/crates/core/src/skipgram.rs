//! Skip-gram with negative sampling.
//!
//! For a center `u`, context `v` and noise nodes `n_1..n_k` the per-pair loss
//! is `-log s(in_u . out_v) - sum_i log s(-in_u . out_{n_i})` with `s` the
//! logistic sigmoid. One SGD step moves every touched row by `-lr` times its
//! gradient, all gradients evaluated at the pre-update parameters.

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{AliasTable, Graph, NodeId};
use crate::matrix::{axpy, dot, Matrix};
use crate::rng::{stream, Domain};
use crate::walker::WalkCorpus;

/// Input vectors (the embedding) and output/context vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub input: Matrix,
    pub output: Matrix,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn node_count(&self) -> usize {
        self.input.rows()
    }

    pub fn vector(&self, u: NodeId) -> &[f64] {
        self.input.row(u.index())
    }

    pub fn into_embedding(self) -> Matrix {
        self.input
    }

    pub fn is_finite(&self) -> bool {
        self.input.as_slice().iter().all(|x| x.is_finite())
            && self.output.as_slice().iter().all(|x| x.is_finite())
    }
}

/// Input entries uniform on `[-0.5/d, 0.5/d]`, output entries zero.
pub fn init_embeddings(node_count: usize, dim: usize, seed: u64) -> Result<EmbeddingModel> {
    if node_count == 0 || dim == 0 {
        return Err(Error::config("embedding needs at least one node and one dimension"));
    }
    let mut rng = stream(seed, Domain::Init, 0, 0);
    let bound = 0.5 / dim as f64;
    let data = (0..node_count * dim)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Ok(EmbeddingModel {
        input: Matrix::from_vec(node_count, dim, data)?,
        output: Matrix::zeros(node_count, dim),
    })
}

impl EmbeddingModel {
    /// Grows the model to `node_count` rows; new input rows are drawn like
    /// [`init_embeddings`] from a stream keyed by their row index, new output
    /// rows are zero.
    pub fn with_rows(self, node_count: usize, seed: u64) -> Result<Self> {
        let (old, dim) = (self.node_count(), self.dim());
        if node_count < old {
            return Err(Error::config(format!(
                "cannot shrink a {old}-node model to {node_count} nodes"
            )));
        }
        let bound = 0.5 / dim as f64;
        let EmbeddingModel { input, output } = self;
        let mut input = input.into_vec();
        for row in old..node_count {
            let mut rng = stream(seed, Domain::Init, 1, row as u64);
            input.extend((0..dim).map(|_| rng.random_range(-bound..=bound)));
        }
        let mut output = output.into_vec();
        output.resize(node_count * dim, 0.0);
        Ok(EmbeddingModel {
            input: Matrix::from_vec(node_count, dim, input)?,
            output: Matrix::from_vec(node_count, dim, output)?,
        })
    }
}

const EXP_CLAMP: f64 = 30.0;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x.clamp(-EXP_CLAMP, EXP_CLAMP)).exp())
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `s(in_u . out_v)`
pub fn score(model: &EmbeddingModel, u: NodeId, v: NodeId) -> f64 {
    sigmoid(dot(model.input.row(u.index()), model.output.row(v.index())))
}

pub fn pair_loss(model: &EmbeddingModel, u: NodeId, v: NodeId, negatives: &[NodeId]) -> f64 {
    let input = model.input.row(u.index());
    softplus(-dot(input, model.output.row(v.index())))
        + negatives
            .iter()
            .map(|n| softplus(dot(input, model.output.row(n.index()))))
            .sum::<f64>()
}

/// Gradients of [`pair_loss`]. `negatives[i]` belongs to the i-th noise
/// node; repeated noise nodes get one entry each.
#[derive(Clone, Debug)]
pub struct PairGradient {
    pub input: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn pair_gradient(
    model: &EmbeddingModel,
    u: NodeId,
    v: NodeId,
    negatives: &[NodeId],
) -> PairGradient {
    let input = model.input.row(u.index());
    let mut grad_input = vec![0.0; model.dim()];
    let mut term = |target: NodeId, label: f64| {
        let out = model.output.row(target.index());
        let coeff = sigmoid(dot(input, out)) - label;
        axpy(coeff, out, &mut grad_input);
        input.iter().map(|x| coeff * x).collect::<Vec<f64>>()
    };
    let context = term(v, 1.0);
    let negs = negatives.iter().map(|&n| term(n, 0.0)).collect();
    PairGradient {
        input: grad_input,
        context,
        negatives: negs,
    }
}

/// Scores and updates for one (center, context) pair against raw rows.
/// Returns the loss before the update.
#[inline]
fn update_rows(
    input: &mut [f64],
    mut output_row: impl FnMut(NodeId) -> *mut f64,
    v: NodeId,
    negatives: &[NodeId],
    lr: f64,
    frozen: usize,
    coeffs: &mut Vec<f64>,
    neu1e: &mut [f64],
) -> f64 {
    let dim = input.len();
    coeffs.clear();
    let mut loss = 0.0;
    for (i, &target) in std::iter::once(&v).chain(negatives).enumerate() {
        // SAFETY: rows are `dim` long and live as long as the matrix; see
        // `Shared` for the concurrent case.
        let out = unsafe { std::slice::from_raw_parts(output_row(target), dim) };
        let x = dot(input, out);
        let label = if i == 0 { 1.0 } else { 0.0 };
        loss += if i == 0 { softplus(-x) } else { softplus(x) };
        coeffs.push(lr * (label - sigmoid(x)));
    }
    neu1e.fill(0.0);
    for (&target, &c) in std::iter::once(&v).chain(negatives).zip(coeffs.iter()) {
        let out = unsafe { std::slice::from_raw_parts(output_row(target), dim) };
        axpy(c, out, neu1e);
    }
    for (&target, &c) in std::iter::once(&v).chain(negatives).zip(coeffs.iter()) {
        if target.index() < frozen {
            continue;
        }
        let out = unsafe { std::slice::from_raw_parts_mut(output_row(target), dim) };
        axpy(c, input, out);
    }
    for (x, d) in input.iter_mut().zip(neu1e.iter()) {
        *x += d;
    }
    loss
}

/// One negative-sampling SGD step. `negatives` must not contain `v`.
pub fn sgd_pair_update(
    model: &mut EmbeddingModel,
    u: NodeId,
    v: NodeId,
    negatives: &[NodeId],
    lr: f64,
) -> f64 {
    debug_assert!(!negatives.contains(&v));
    let dim = model.dim();
    let mut neu1e = vec![0.0; dim];
    let mut coeffs = Vec::with_capacity(negatives.len() + 1);
    let EmbeddingModel { input, output } = model;
    let base = output.as_mut_slice().as_mut_ptr();
    update_rows(
        input.row_mut(u.index()),
        |t| unsafe { base.add(t.index() * dim) },
        v,
        negatives,
        lr,
        0,
        &mut coeffs,
        &mut neu1e,
    )
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub window: usize,
    pub initial_lr: f64,
    pub negatives: usize,
    pub seed: u64,
    pub workers: usize,
    /// Single trainer thread, bit-reproducible output.
    pub deterministic: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            window: 10,
            initial_lr: 0.025,
            negatives: 5,
            seed: 0,
            workers: 1,
            deterministic: true,
        }
    }
}

impl TrainConfig {
    pub fn min_lr(&self) -> f64 {
        self.initial_lr * 1e-4
    }

    /// Learning rate after `processed` of `total` center positions.
    pub fn learning_rate(&self, processed: usize, total: usize) -> f64 {
        let progress = if total == 0 { 0.0 } else { processed as f64 / total as f64 };
        (self.initial_lr * (1.0 - progress)).max(self.min_lr())
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::config("window must be at least 1"));
        }
        if self.negatives == 0 {
            return Err(Error::config("need at least one negative sample"));
        }
        if !(self.initial_lr > 0.0) {
            return Err(Error::config("learning rate must be positive"));
        }
        Ok(())
    }

    fn effective_workers(&self) -> usize {
        if self.deterministic {
            1
        } else {
            self.workers.max(1)
        }
    }
}

/// Unigram^0.75 noise distribution over corpus frequencies.
pub struct NoiseDistribution {
    table: AliasTable,
}

impl NoiseDistribution {
    pub fn from_corpus(corpus: &WalkCorpus, node_count: usize) -> Option<Self> {
        let mut freq = vec![0.0f64; node_count];
        for v in corpus.tokens() {
            freq[v.index()] += 1.0;
        }
        Self::from_counts(&freq)
    }

    /// Noise ∝ `count^0.75`; `None` if every count is zero.
    pub fn from_counts(freq: &[f64]) -> Option<Self> {
        if freq.iter().all(|&f| f == 0.0) {
            return None;
        }
        let weights: Vec<f64> = freq.iter().map(|f| f.powf(0.75)).collect();
        Some(NoiseDistribution {
            table: AliasTable::new(&weights),
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        NodeId(self.table.sample(rng) as u32)
    }
}

/// Number of (center, context) pairs a walk of `len` nodes produces.
pub fn pairs_in_walk(len: usize, window: usize) -> usize {
    (0..len)
        .map(|i| i.min(window) + (len - 1 - i).min(window))
        .sum()
}

/// Shared matrices for lock-free asynchronous SGD. Workers may overwrite
/// each other's updates; they never resize or free the buffers.
struct Shared {
    input: *mut f64,
    output: *mut f64,
    dim: usize,
}

unsafe impl Send for Shared {}
unsafe impl Sync for Shared {}

/// Trains on every walk of `corpus`: each position is a center whose
/// context is every other node within `window` positions in the same walk.
/// The learning rate decays linearly in processed center positions.
pub fn train(corpus: &WalkCorpus, config: &TrainConfig, model: EmbeddingModel) -> Result<EmbeddingModel> {
    train_from(corpus, config, model, 0, None)
}

/// [`train`] with both vectors of nodes below `frozen` held fixed: those nodes
/// are skipped as centers and never updated as contexts or negatives. Used to
/// embed appended nodes without disturbing existing coordinates. `noise`
/// overrides the corpus unigram distribution, which a corpus of walks from a
/// few new nodes represents poorly.
pub fn train_from(
    corpus: &WalkCorpus,
    config: &TrainConfig,
    mut model: EmbeddingModel,
    frozen: usize,
    noise: Option<NoiseDistribution>,
) -> Result<EmbeddingModel> {
    config.validate()?;
    let n = model.node_count();
    if let Some(bad) = corpus.tokens().iter().find(|v| v.index() >= n) {
        return Err(Error::UnknownNode {
            node: bad.index(),
            node_count: n,
        });
    }
    if corpus.token_count() == 0 {
        return Ok(model);
    }
    let Some(noise) = noise.or_else(|| NoiseDistribution::from_corpus(corpus, n)) else {
        return Ok(model);
    };

    let total = corpus.token_count();
    let processed = AtomicUsize::new(0);
    let workers = config.effective_workers().min(corpus.len().max(1));
    let dim = model.dim();
    let shared = Shared {
        input: model.input.as_mut_slice().as_mut_ptr(),
        output: model.output.as_mut_slice().as_mut_ptr(),
        dim,
    };

    let run = |worker: usize| {
        let mut rng = stream(config.seed, Domain::Train, worker as u64, 0);
        let mut negatives = Vec::with_capacity(config.negatives);
        let mut coeffs = Vec::with_capacity(config.negatives + 1);
        let mut neu1e = vec![0.0; dim];
        let shared = &shared;
        let mut walk_index = worker;
        while walk_index < corpus.len() {
            let walk = corpus.get(walk_index);
            let done = processed.fetch_add(walk.len(), Ordering::Relaxed);
            for (i, &center) in walk.iter().enumerate() {
                if center.index() < frozen {
                    continue;
                }
                let lr = config.learning_rate(done + i, total);
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window).min(walk.len() - 1);
                for (j, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    negatives.clear();
                    for _ in 0..config.negatives {
                        let neg = noise.sample(&mut rng);
                        if neg != context {
                            negatives.push(neg);
                        }
                    }
                    // SAFETY: indices were range-checked against the matrices
                    // above. In parallel mode rows may be written by several
                    // workers at once; lost updates are accepted.
                    let input = unsafe {
                        std::slice::from_raw_parts_mut(shared.input.add(center.index() * dim), dim)
                    };
                    update_rows(
                        input,
                        |t| unsafe { shared.output.add(t.index() * shared.dim) },
                        context,
                        &negatives,
                        lr,
                        frozen,
                        &mut coeffs,
                        &mut neu1e,
                    );
                }
            }
            walk_index += workers;
        }
    };

    if workers == 1 {
        run(0);
    } else {
        std::thread::scope(|scope| {
            for w in 0..workers {
                let run = &run;
                scope.spawn(move || run(w));
            }
        });
    }
    Ok(model)
}

/// word2vec text format: `count dim`, then `label v1 .. vd` per node.
pub fn write_word2vec<W: Write>(g: &Graph, embedding: &Matrix, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", embedding.rows(), embedding.cols())?;
    for u in g.nodes() {
        write!(out, "{}", g.label(u))?;
        for x in embedding.row(u.index()) {
            write!(out, " {x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parses word2vec text embeddings; rows come back keyed by label.
pub fn read_word2vec<R: BufRead>(reader: R) -> Result<(Vec<String>, Matrix)> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
    let mut head = header.split_whitespace().map(str::parse::<usize>);
    let (rows, dim) = match (head.next(), head.next(), head.next()) {
        (Some(Ok(r)), Some(Ok(d)), None) => (r, d),
        _ => return Err(Error::parse(1, "header must be `count dim`")),
    };
    let mut labels = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = tokens.next().expect("non-empty line");
        let before = data.len();
        for t in tokens {
            data.push(
                t.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("`{t}` is not a number")))?,
            );
        }
        if data.len() - before != dim {
            return Err(Error::parse(
                line_no,
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
        labels.push(label.to_owned());
    }
    if labels.len() != rows {
        return Err(Error::parse(
            labels.len() + 1,
            format!("header promises {rows} rows, found {}", labels.len()),
        ));
    }
    Ok((labels, Matrix::from_vec(rows, dim, data)?))
}
