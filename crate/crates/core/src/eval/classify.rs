use std::collections::HashMap;
use std::io::BufRead;

use rand::seq::SliceRandom;

use super::logistic::{FitOptions, LogisticRegression};
use super::metrics::{micro_macro_f1, F1Scores};
use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeLabels};
use crate::matrix::Matrix;
use crate::rng::{stream, Domain};

/// Multi-label ground truth: one (possibly empty) label list per node.
#[derive(Clone, Debug, Default)]
pub struct LabelSet {
    per_node: Vec<Vec<u32>>,
    names: Vec<String>,
}

impl LabelSet {
    pub fn new(node_count: usize, label_count: usize) -> Self {
        LabelSet {
            per_node: vec![Vec::new(); node_count],
            names: (0..label_count).map(|l| l.to_string()).collect(),
        }
    }

    pub fn add(&mut self, u: NodeId, label: u32) {
        assert!((label as usize) < self.names.len(), "label {label} out of range");
        let list = &mut self.per_node[u.index()];
        if let Err(pos) = list.binary_search(&label) {
            list.insert(pos, label);
        }
    }

    pub fn labels_of(&self, u: NodeId) -> &[u32] {
        &self.per_node[u.index()]
    }

    pub fn label_count(&self) -> usize {
        self.names.len()
    }

    pub fn label_name(&self, label: u32) -> &str {
        &self.names[label as usize]
    }

    pub fn labeled_nodes(&self) -> Vec<NodeId> {
        (0..self.per_node.len())
            .filter(|&u| !self.per_node[u].is_empty())
            .map(NodeId::from)
            .collect()
    }
}

/// Reads `node label [label ..]` lines; node tokens must be known to
/// `nodes`. Label tokens get dense ids in first-seen order.
pub fn load_labels<R: BufRead>(reader: R, nodes: &NodeLabels) -> Result<LabelSet> {
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut names = Vec::new();
    let mut per_node = vec![Vec::new(); nodes.len()];
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let node = tokens.next().expect("non-empty line");
        let u = nodes
            .get(node)
            .ok_or_else(|| Error::parse(i + 1, format!("unknown node `{node}`")))?;
        let mut any = false;
        for t in tokens {
            let next = ids.len() as u32;
            let id = *ids.entry(t.to_owned()).or_insert_with(|| {
                names.push(t.to_owned());
                next
            });
            per_node[u.index()].push(id);
            any = true;
        }
        if !any {
            return Err(Error::parse(i + 1, "node without labels"));
        }
    }
    for list in &mut per_node {
        list.sort_unstable();
        list.dedup();
    }
    Ok(LabelSet { per_node, names })
}

/// The `k` highest-scoring labels; ties go to the lower label id.
pub fn predict_top_k(scores: &[f64], k: usize) -> Vec<u32> {
    let mut order: Vec<u32> = (0..scores.len() as u32).collect();
    order.sort_by(|&a, &b| scores[b as usize].total_cmp(&scores[a as usize]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

#[derive(Clone, Debug)]
pub struct ClassificationResult {
    pub scores: F1Scores,
    pub train_nodes: usize,
    pub test_nodes: usize,
    /// Labels with no positive training example; their classifiers always
    /// answer negative.
    pub untrained_labels: Vec<u32>,
}

/// One-vs-rest logistic regression on a random `train_fraction` of the
/// labelled nodes; every test node is assigned as many top-scoring labels as
/// it truly has.
pub fn classify_experiment(
    embedding: &Matrix,
    labels: &LabelSet,
    train_fraction: f64,
    seed: u64,
) -> Result<ClassificationResult> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::config(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let mut nodes = labels.labeled_nodes();
    if nodes.len() < 2 {
        return Err(Error::EmptyEvaluation);
    }
    if let Some(u) = nodes.iter().find(|u| u.index() >= embedding.rows()) {
        return Err(Error::UnknownNode {
            node: u.index(),
            node_count: embedding.rows(),
        });
    }
    nodes.shuffle(&mut stream(seed, Domain::Classify, 0, 0));
    let n_train = ((train_fraction * nodes.len() as f64).round() as usize).clamp(1, nodes.len() - 1);
    let (train, test) = nodes.split_at(n_train);

    let dim = embedding.cols();
    let gather = |set: &[NodeId]| {
        let data = set.iter().flat_map(|u| embedding.row(u.index()).iter().copied()).collect();
        Matrix::from_vec(set.len(), dim, data).expect("rows * dim values")
    };
    let x_train = gather(train);
    let x_test = gather(test);

    let options = FitOptions::default();
    let mut untrained_labels = Vec::new();
    let classifiers: Vec<LogisticRegression> = (0..labels.label_count() as u32)
        .map(|l| {
            let y: Vec<bool> = train.iter().map(|&u| labels.labels_of(u).contains(&l)).collect();
            if !y.contains(&true) {
                untrained_labels.push(l);
            }
            LogisticRegression::fit(&x_train, &y, &options)
        })
        .collect();

    let mut predictions = Vec::with_capacity(test.len());
    let mut truth = Vec::with_capacity(test.len());
    let mut scores = vec![0.0; classifiers.len()];
    for (row, &u) in x_test.iter_rows().zip(test) {
        for (s, c) in scores.iter_mut().zip(&classifiers) {
            *s = c.decision(row);
        }
        let gold = labels.labels_of(u);
        predictions.push(predict_top_k(&scores, gold.len()));
        truth.push(gold.to_vec());
    }

    Ok(ClassificationResult {
        scores: micro_macro_f1(&predictions, &truth, labels.label_count())?,
        train_nodes: train.len(),
        test_nodes: test.len(),
        untrained_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Graph};

    #[test]
    fn top_k_orders_by_score_then_id() {
        assert_eq!(predict_top_k(&[0.1, 0.9, 0.5, 0.9], 2), vec![1, 3]);
        assert_eq!(predict_top_k(&[0.2, 0.2, 0.2], 1), vec![0]);
        assert_eq!(predict_top_k(&[f64::NEG_INFINITY, -5.0], 1), vec![1]);
    }

    #[test]
    fn one_hot_clusters_are_perfectly_classified() {
        // Two 10-node groups; the embedding is the one-hot group indicator.
        let n = 20;
        let mut labels = LabelSet::new(n, 2);
        let mut data = Vec::new();
        for u in 0..n {
            let group = (u >= 10) as u32;
            labels.add(NodeId::from(u), group);
            data.extend_from_slice(if group == 0 { &[1.0, 0.0] } else { &[0.0, 1.0] });
        }
        let embedding = Matrix::from_vec(n, 2, data).unwrap();
        for seed in 0..5 {
            let r = classify_experiment(&embedding, &labels, 0.5, seed).unwrap();
            assert_eq!(r.scores.micro, 1.0);
            assert_eq!(r.scores.macro_, 1.0);
            assert_eq!(r.train_nodes, 10);
        }
    }

    #[test]
    fn absent_label_is_recorded_not_fatal() {
        // Label 1 only on node 0; with a single training node it may be missing.
        let mut labels = LabelSet::new(4, 2);
        for u in 0..4 {
            labels.add(NodeId::from(u), 0);
        }
        labels.add(NodeId(0), 1);
        let embedding = Matrix::from_vec(4, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut saw_untrained = false;
        for seed in 0..10 {
            let r = classify_experiment(&embedding, &labels, 0.25, seed).unwrap();
            saw_untrained |= r.untrained_labels == vec![1];
        }
        assert!(saw_untrained);
    }

    #[test]
    fn label_file_parsing() {
        let g = Graph::from_edges(3, false, vec![Edge::unit(0, 1), Edge::unit(1, 2)]).unwrap();
        let labels = load_labels("0 a b\n2 b\n0 c\n".as_bytes(), g.labels()).unwrap();
        assert_eq!(labels.label_count(), 3);
        assert_eq!(labels.labels_of(NodeId(0)), &[0, 1, 2]);
        assert_eq!(labels.labels_of(NodeId(1)), &[] as &[u32]);
        assert_eq!(labels.label_name(1), "b");
        assert!(matches!(load_labels("9 a\n".as_bytes(), g.labels()), Err(Error::Parse { line: 1, .. })));
        assert!(load_labels("0\n".as_bytes(), g.labels()).is_err());
    }
}
