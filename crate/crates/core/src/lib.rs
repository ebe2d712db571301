//! Community-aware network embedding.
//!
//! The pipeline runs in four stages, each in its own module:
//!
//! 1. [`community`] detects a non-overlapping partition by Louvain modularity
//!    maximization.
//! 2. [`walker`] generates random walks that, at every step, either follow a
//!    weighted edge or jump to a uniformly chosen member of the current node's
//!    community.
//! 3. [`skipgram`] learns node vectors from the walk corpus with negative
//!    sampling and linearly decaying SGD.
//! 4. [`eval`] scores the vectors on multi-label node classification
//!    (micro/macro F1) and link prediction (AUC).
//!
//! [`pipeline`] wires the first three stages together; [`synth`] generates
//! planted-community benchmark graphs.

pub mod community;
pub mod error;
pub mod eval;
pub mod graph;
pub mod matrix;
pub mod pipeline;
pub mod rng;
pub mod skipgram;
pub mod synth;
pub mod walker;

pub use community::{louvain, modularity, LouvainConfig, Partition};
pub use error::{Error, Result};
pub use eval::{EdgeOperator, EvalReport, LabelSet};
pub use graph::{AliasSampler, Edge, EdgeSplit, Graph, LoadOptions, NodeId, NodeLabels};
pub use matrix::Matrix;
pub use pipeline::{embed_appended, embed_graph, EmbedConfig, Embedding};
pub use skipgram::{EmbeddingModel, TrainConfig};
pub use walker::{Walk, WalkConfig, WalkCorpus};
