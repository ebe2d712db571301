use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F1Scores {
    pub micro: f64,
    pub macro_: f64,
}

/// `2 tp / (2 tp + fp + fn)`, equal to `2PR / (P + R)`; zero when undefined.
fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

/// Micro-F1 from pooled counts; macro-F1 as the mean per-label F1 over the
/// `label_count` labels (labels never predicted nor present score 0).
pub fn micro_macro_f1(
    predictions: &[Vec<u32>],
    truth: &[Vec<u32>],
    label_count: usize,
) -> Result<F1Scores> {
    if predictions.is_empty() || label_count == 0 {
        return Err(Error::EmptyEvaluation);
    }
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    let mut tp = vec![0usize; label_count];
    let mut fp = vec![0usize; label_count];
    let mut fn_ = vec![0usize; label_count];
    for (pred, gold) in predictions.iter().zip(truth) {
        for &l in pred {
            if gold.contains(&l) {
                tp[l as usize] += 1;
            } else {
                fp[l as usize] += 1;
            }
        }
        for &l in gold {
            if !pred.contains(&l) {
                fn_[l as usize] += 1;
            }
        }
    }
    let micro = f1(tp.iter().sum(), fp.iter().sum(), fn_.iter().sum());
    let macro_ = (0..label_count).map(|l| f1(tp[l], fp[l], fn_[l])).sum::<f64>() / label_count as f64;
    Ok(F1Scores { micro, macro_ })
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Uses midranks, O(n log n).
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share their mean.
        let midrank = (i + j + 2) as f64 / 2.0;
        positive_rank_sum += midrank * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let p = positives as f64;
    let u = positive_rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_disjoint_predictions() {
        let truth = vec![vec![0, 1], vec![2]];
        let s = micro_macro_f1(&truth, &truth, 3).unwrap();
        assert_eq!((s.micro, s.macro_), (1.0, 1.0));
        let wrong = vec![vec![2], vec![0]];
        let s = micro_macro_f1(&wrong, &truth, 3).unwrap();
        assert_eq!((s.micro, s.macro_), (0.0, 0.0));
    }

    #[test]
    fn hand_computed_two_labels() {
        // Label 0: TP 1, FP 1. Label 1: FN 1.
        let predictions = vec![vec![0], vec![0]];
        let truth = vec![vec![0], vec![1]];
        let s = micro_macro_f1(&predictions, &truth, 2).unwrap();
        assert!((s.micro - 0.5).abs() < 1e-15);
        assert!((s.macro_ - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_set_is_an_error() {
        assert!(matches!(micro_macro_f1(&[], &[], 2), Err(Error::EmptyEvaluation)));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_roc(&[0.9, 0.8, 0.1], &[true, true, false]).unwrap(), 1.0);
        assert_eq!(auc_roc(&[0.3; 4], &[true, false, true, false]).unwrap(), 0.5);
        assert_eq!(
            auc_roc(&[0.9, 0.4, 0.6, 0.1], &[true, true, false, false]).unwrap(),
            0.75
        );
        assert!(matches!(auc_roc(&[0.1, 0.2], &[true, true]), Err(Error::SingleClass)));
    }
}
