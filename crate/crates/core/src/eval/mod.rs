//! Downstream evaluation: multi-label node classification and link
//! prediction.

mod classify;
mod linkpred;
mod logistic;
mod metrics;

pub use classify::{classify_experiment, load_labels, predict_top_k, LabelSet};
pub use linkpred::{edge_features, linkpred_experiment, EdgeOperator, LinkPredConfig};
pub use logistic::LogisticRegression;
pub use metrics::{auc_roc, micro_macro_f1, F1Scores};

use std::fmt::Write as _;

/// One result row. Unused metrics are `None` and print as empty CSV cells.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub task: String,
    pub dataset: String,
    pub train_fraction: Option<f64>,
    pub operator: Option<EdgeOperator>,
    pub alpha: f64,
    pub seed: u64,
    pub micro_f1: Option<f64>,
    pub macro_f1: Option<f64>,
    pub auc: Option<f64>,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "task,dataset,train_fraction,operator,alpha,seed,micro_f1,macro_f1,auc";

    pub fn csv_row(&self) -> String {
        fn cell(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut row = String::new();
        write!(
            row,
            "{},{},{},{},{},{},{},{},{}",
            self.task,
            self.dataset,
            cell(self.train_fraction),
            self.operator.map(|o| o.to_string()).unwrap_or_default(),
            self.alpha,
            self.seed,
            cell(self.micro_f1),
            cell(self.macro_f1),
            cell(self.auc),
        )
        .expect("writing to a String");
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_row_leaves_unused_cells_empty() {
        let r = EvalReport {
            task: "classify".into(),
            dataset: "ppi".into(),
            train_fraction: Some(0.5),
            operator: None,
            alpha: 0.2,
            seed: 3,
            micro_f1: Some(0.25),
            macro_f1: Some(0.125),
            auc: None,
        };
        assert_eq!(r.csv_row(), "classify,ppi,0.5,,0.2,3,0.25,0.125,");
        assert_eq!(EvalReport::CSV_HEADER.split(',').count(), r.csv_row().split(',').count());
    }
}
