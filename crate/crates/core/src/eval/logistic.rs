//! Binary L2-regularized logistic regression fitted by full-batch L-BFGS.

use std::collections::VecDeque;

use crate::matrix::{axpy, dot, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticRegression {
    weights: Vec<f64>,
    bias: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Strength of the `0.5 * l2 * |w|^2` penalty; the bias is unpenalized.
    pub l2: f64,
    pub max_iter: usize,
    pub tolerance: f64,
    pub history: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            l2: 1.0,
            max_iter: 200,
            tolerance: 1e-6,
            history: 10,
        }
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Objective and gradient at `params = [w.., b]`.
fn objective(x: &Matrix, y: &[bool], l2: f64, params: &[f64], grad: &mut [f64]) -> f64 {
    let d = x.cols();
    let (w, b) = (&params[..d], params[d]);
    grad.fill(0.0);
    let mut loss = 0.5 * l2 * dot(w, w);
    for (row, &label) in x.iter_rows().zip(y) {
        let sign = if label { 1.0 } else { -1.0 };
        let margin = sign * (dot(w, row) + b);
        loss += softplus(-margin);
        let coeff = -sign * sigmoid(-margin);
        axpy(coeff, row, &mut grad[..d]);
        grad[d] += coeff;
    }
    axpy(l2, w, &mut grad[..d]);
    loss
}

impl LogisticRegression {
    /// A classifier that always answers `positive`.
    pub fn constant(dim: usize, positive: bool) -> Self {
        LogisticRegression {
            weights: vec![0.0; dim],
            bias: if positive { f64::INFINITY } else { f64::NEG_INFINITY },
        }
    }

    pub fn fit(x: &Matrix, y: &[bool], options: &FitOptions) -> Self {
        assert_eq!(x.rows(), y.len());
        let d = x.cols();
        let positives = y.iter().filter(|&&l| l).count();
        if positives == 0 || positives == y.len() {
            return Self::constant(d, positives > 0);
        }

        let mut params = vec![0.0; d + 1];
        let mut grad = vec![0.0; d + 1];
        let mut f = objective(x, y, options.l2, &params, &mut grad);
        let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        let mut trial = vec![0.0; d + 1];
        let mut trial_grad = vec![0.0; d + 1];

        for _ in 0..options.max_iter {
            let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            if gnorm <= options.tolerance * f.abs().max(1.0) {
                break;
            }

            // Two-loop recursion for the quasi-Newton direction.
            let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
            let mut alphas = Vec::with_capacity(memory.len());
            for (s, yv, rho) in memory.iter().rev() {
                let a = rho * dot(s, &dir);
                axpy(-a, yv, &mut dir);
                alphas.push(a);
            }
            if let Some((s, yv, _)) = memory.back() {
                let gamma = dot(s, yv) / dot(yv, yv);
                dir.iter_mut().for_each(|v| *v *= gamma);
            } else {
                let scale = 1.0 / grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                dir.iter_mut().for_each(|v| *v *= scale);
            }
            for ((s, yv, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
                let beta = rho * dot(yv, &dir);
                axpy(a - beta, s, &mut dir);
            }

            let mut slope = dot(&grad, &dir);
            if slope >= 0.0 {
                memory.clear();
                dir = grad.iter().map(|g| -g).collect();
                slope = dot(&grad, &dir);
            }

            // Backtracking Armijo search.
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                for ((t, p), dv) in trial.iter_mut().zip(&params).zip(&dir) {
                    *t = p + step * dv;
                }
                let ft = objective(x, y, options.l2, &trial, &mut trial_grad);
                if ft <= f + 1e-4 * step * slope {
                    accepted = Some(ft);
                    break;
                }
                step *= 0.5;
            }
            let Some(f_new) = accepted else { break };

            let s: Vec<f64> = trial.iter().zip(&params).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &yv);
            if sy > 1e-12 {
                if memory.len() == options.history {
                    memory.pop_front();
                }
                memory.push_back((s, yv, 1.0 / sy));
            }
            std::mem::swap(&mut params, &mut trial);
            std::mem::swap(&mut grad, &mut trial_grad);
            let improvement = f - f_new;
            f = f_new;
            if improvement <= 1e-12 * f.abs().max(1.0) {
                break;
            }
        }

        let bias = params.pop().expect("bias slot");
        LogisticRegression {
            weights: params,
            bias,
        }
    }

    /// Linear score `w . x + b`.
    pub fn decision(&self, x: &[f64]) -> f64 {
        if self.bias.is_infinite() {
            return self.bias;
        }
        dot(&self.weights, x) + self.bias
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}
