use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use super::logistic::{FitOptions, LogisticRegression};
use super::metrics::auc_roc;
use crate::error::{Error, Result};
use crate::graph::{split_edges, Graph, NodeId, NonEdgeSampler};
use crate::matrix::Matrix;
use crate::pipeline::{embed_graph, EmbedConfig};
use crate::rng::{stream, Domain};

/// Element-wise binary operators that turn two node vectors into an edge
/// vector of the same dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeOperator {
    Hadamard,
    Average,
    WeightedL1,
    WeightedL2,
}

impl EdgeOperator {
    pub const ALL: [EdgeOperator; 4] = [
        EdgeOperator::Hadamard,
        EdgeOperator::Average,
        EdgeOperator::WeightedL1,
        EdgeOperator::WeightedL2,
    ];

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            EdgeOperator::Hadamard => a * b,
            EdgeOperator::Average => 0.5 * (a + b),
            EdgeOperator::WeightedL1 => (a - b).abs(),
            EdgeOperator::WeightedL2 => (a - b) * (a - b),
        }
    }
}

impl fmt::Display for EdgeOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeOperator::Hadamard => "hadamard",
            EdgeOperator::Average => "average",
            EdgeOperator::WeightedL1 => "weighted-l1",
            EdgeOperator::WeightedL2 => "weighted-l2",
        })
    }
}

impl FromStr for EdgeOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hadamard" => Ok(EdgeOperator::Hadamard),
            "average" => Ok(EdgeOperator::Average),
            "weighted-l1" | "l1" => Ok(EdgeOperator::WeightedL1),
            "weighted-l2" | "l2" => Ok(EdgeOperator::WeightedL2),
            other => Err(Error::config(format!("unknown edge operator `{other}`"))),
        }
    }
}

pub fn edge_features(fu: &[f64], fv: &[f64], op: EdgeOperator) -> Result<Vec<f64>> {
    if fu.len() != fv.len() {
        return Err(Error::DimensionMismatch {
            left: fu.len(),
            right: fv.len(),
        });
    }
    Ok(fu.iter().zip(fv).map(|(&a, &b)| op.apply(a, b)).collect())
}

fn feature_matrix(embedding: &Matrix, pairs: &[(NodeId, NodeId)], op: EdgeOperator) -> Matrix {
    let dim = embedding.cols();
    let mut data = Vec::with_capacity(pairs.len() * dim);
    for &(u, v) in pairs {
        let (a, b) = (embedding.row(u.index()), embedding.row(v.index()));
        data.extend(a.iter().zip(b).map(|(&x, &y)| op.apply(x, y)));
    }
    Matrix::from_vec(pairs.len(), dim, data).expect("pairs * dim values")
}

#[derive(Clone, Debug)]
pub struct LinkPredConfig {
    pub removal_fraction: f64,
    pub embed: EmbedConfig,
    /// Seeds the edge split and the training negatives.
    pub seed: u64,
}

impl Default for LinkPredConfig {
    fn default() -> Self {
        LinkPredConfig {
            removal_fraction: 0.5,
            embed: EmbedConfig::link_prediction(),
            seed: 0,
        }
    }
}

/// Removes a fraction of edges, embeds the residual graph, trains one
/// classifier per operator on residual edges versus fresh non-edges, and
/// returns each operator's AUC on removed edges versus held-out non-edges.
pub fn linkpred_experiment(
    g: &Graph,
    config: &LinkPredConfig,
    operators: &[EdgeOperator],
) -> Result<Vec<(EdgeOperator, f64)>> {
    let split = split_edges(g, config.removal_fraction, config.seed)?;
    let embedding = embed_graph(&split.residual, &config.embed)?.model.into_embedding();

    let train_pos: Vec<(NodeId, NodeId)> = split
        .residual
        .edges()
        .iter()
        .map(|e| (e.source, e.target))
        .collect();
    if train_pos.is_empty() {
        return Err(Error::config("residual graph has no edges to train on"));
    }
    let held_out: HashSet<(u32, u32)> = split
        .negative_edges
        .iter()
        .map(|&(u, v)| (u.0.min(v.0), u.0.max(v.0)))
        .collect();
    let mut rng = stream(config.seed, Domain::LinkPred, 0, 0);
    let train_neg = NonEdgeSampler::new(g).sample(train_pos.len(), &held_out, &mut rng)?;

    let train_pairs: Vec<_> = train_pos.iter().chain(&train_neg).copied().collect();
    let train_labels: Vec<bool> = (0..train_pairs.len()).map(|i| i < train_pos.len()).collect();
    let test_pairs: Vec<_> = split
        .removed_edges
        .iter()
        .chain(&split.negative_edges)
        .copied()
        .collect();
    let test_labels: Vec<bool> = (0..test_pairs.len())
        .map(|i| i < split.removed_edges.len())
        .collect();

    operators
        .iter()
        .map(|&op| {
            let x = feature_matrix(&embedding, &train_pairs, op);
            let model = LogisticRegression::fit(&x, &train_labels, &FitOptions::default());
            drop(x);
            let x_test = feature_matrix(&embedding, &test_pairs, op);
            let scores: Vec<f64> = x_test.iter_rows().map(|r| model.decision(r)).collect();
            Ok((op, auc_roc(&scores, &test_labels)?))
        })
        .collect()
}
