//! L2-regularized logistic regression on sparse rows, fit by a truncated
//! Newton (conjugate gradient) iteration with Armijo backtracking, and
//! k-fold cross-validation over a log-spaced regularization grid.
//!
//! Objective: `sum_i log(1 + exp(-y_i (w.x_i + b))) + lambda/2 |w|^2`,
//! bias unregularized.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::features::SparseVector;
use crate::score::sigmoid;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Stop once the gradient's infinity norm falls below this.
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            grad_tol: 1e-6,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_inf_norm: f64,
    /// Objective value at the start of each iteration and at the end.
    pub loss_trace: Vec<f64>,
}

impl LogisticFit {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn probability(&self, x: &SparseVector) -> f64 {
        sigmoid(self.decision(x))
    }
}

/// `n` values log-spaced over [1e-4, 1e4], ascending.
pub fn lambda_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..n).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / (n - 1) as f64)).collect(),
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

struct Problem<'a> {
    rows: &'a [&'a SparseVector],
    labels: &'a [bool],
    lambda: f64,
}

impl Problem<'_> {
    fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        self.rows.iter().map(|x| x.dot(w) + b).collect()
    }

    fn loss(&self, w: &[f64], b: f64) -> f64 {
        let data: f64 = self
            .rows
            .iter()
            .zip(self.labels)
            .map(|(x, &y)| {
                let z = x.dot(w) + b;
                softplus(if y { -z } else { z })
            })
            .sum();
        data + 0.5 * self.lambda * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Gradient (w part, b part) and Hessian diagonal weights at margins `z`.
    fn gradient(&self, w: &[f64], z: &[f64]) -> (Vec<f64>, f64, Vec<f64>) {
        let mut gw: Vec<f64> = w.iter().map(|v| self.lambda * v).collect();
        let mut gb = 0.0;
        let mut d = Vec::with_capacity(z.len());
        for ((x, &y), &zi) in self.rows.iter().zip(self.labels).zip(z) {
            let p = sigmoid(zi);
            let r = p - if y { 1.0 } else { 0.0 };
            for &(j, v) in &x.entries {
                gw[j] += r * v;
            }
            gb += r;
            d.push(p * (1.0 - p));
        }
        (gw, gb, d)
    }

    fn hess_vec(&self, d: &[f64], vw: &[f64], vb: f64) -> (Vec<f64>, f64) {
        let mut hw: Vec<f64> = vw.iter().map(|v| self.lambda * v).collect();
        let mut hb = 0.0;
        for (x, &di) in self.rows.iter().zip(d) {
            let s = di * (x.dot(vw) + vb);
            for &(j, v) in &x.entries {
                hw[j] += s * v;
            }
            hb += s;
        }
        (hw, hb)
    }
}

fn dot2(aw: &[f64], ab: f64, bw: &[f64], bb: f64) -> f64 {
    aw.iter().zip(bw).map(|(a, b)| a * b).sum::<f64>() + ab * bb
}

/// Fits one model. Deterministic: same inputs, same bits.
pub fn fit(rows: &[&SparseVector], labels: &[bool], dim: usize, lambda: f64, opts: NewtonOptions) -> LogisticFit {
    assert_eq!(rows.len(), labels.len());
    let prob = Problem { rows, labels, lambda };
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut loss = prob.loss(&w, b);
    let mut trace = vec![loss];
    let mut converged = false;
    let mut grad_inf = f64::INFINITY;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let z = prob.margins(&w, b);
        let (gw, gb, d) = prob.gradient(&w, &z);
        grad_inf = gw.iter().fold(gb.abs(), |m, v| m.max(v.abs()));
        if grad_inf < opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;

        // Inexact Newton step by conjugate gradient on H p = -g.
        let g_norm = dot2(&gw, gb, &gw, gb).sqrt();
        let cg_tol = g_norm.sqrt().min(0.5) * g_norm;
        let mut pw = vec![0.0; dim];
        let mut pb = 0.0;
        let mut rw: Vec<f64> = gw.iter().map(|v| -v).collect();
        let mut rb = -gb;
        let mut sw = rw.clone();
        let mut sb = rb;
        let mut rr = dot2(&rw, rb, &rw, rb);
        for _ in 0..(dim + 1).min(250) {
            let (hw, hb) = prob.hess_vec(&d, &sw, sb);
            let curv = dot2(&sw, sb, &hw, hb);
            if curv <= 1e-300 {
                break;
            }
            let alpha = rr / curv;
            for (p, s) in pw.iter_mut().zip(&sw) {
                *p += alpha * s;
            }
            pb += alpha * sb;
            for (r, h) in rw.iter_mut().zip(&hw) {
                *r -= alpha * h;
            }
            rb -= alpha * hb;
            let rr_new = dot2(&rw, rb, &rw, rb);
            if rr_new.sqrt() <= cg_tol {
                break;
            }
            let beta = rr_new / rr;
            for (s, r) in sw.iter_mut().zip(&rw) {
                *s = r + beta * *s;
            }
            sb = rb + beta * sb;
            rr = rr_new;
        }
        let mut slope = dot2(&gw, gb, &pw, pb);
        if slope.is_nan() || slope >= 0.0 {
            // Fall back to steepest descent.
            pw = gw.iter().map(|v| -v).collect();
            pb = -gb;
            slope = -g_norm * g_norm;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let tw: Vec<f64> = w.iter().zip(&pw).map(|(a, p)| a + step * p).collect();
            let tb = b + step * pb;
            let tl = prob.loss(&tw, tb);
            if tl <= loss + 1e-4 * step * slope {
                accepted = Some((tw, tb, tl));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((tw, tb, tl)) => {
                w = tw;
                b = tb;
                loss = tl;
                trace.push(loss);
            }
            None => break,
        }
    }

    LogisticFit {
        weights: w,
        bias: b,
        lambda,
        iterations,
        converged,
        grad_inf_norm: grad_inf,
        loss_trace: trace,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub lambda: f64,
    /// Mean fold accuracy per grid value, in grid order.
    pub accuracies: Vec<f64>,
}

/// Stratified k-fold assignment: each label's indices are shuffled and dealt
/// round-robin into folds.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng_for(seed, "cv-folds");
    let mut fold = vec![0; labels.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            fold[i] = pos % k;
        }
    }
    fold
}

/// Picks the grid value with the best mean held-out accuracy; ties go to
/// the larger (stronger) regularization.
pub fn cross_validate(
    rows: &[&SparseVector],
    labels: &[bool],
    dim: usize,
    grid: &[f64],
    k: usize,
    seed: u64,
    opts: NewtonOptions,
) -> CvOutcome {
    let k = k.max(2).min(rows.len().max(2));
    let folds = stratified_folds(labels, k, seed);
    let mut accuracies = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let mut fold_acc = Vec::new();
        for f in 0..k {
            let (mut tr_x, mut tr_y, mut te) = (Vec::new(), Vec::new(), Vec::new());
            for i in 0..rows.len() {
                if folds[i] == f {
                    te.push(i);
                } else {
                    tr_x.push(rows[i]);
                    tr_y.push(labels[i]);
                }
            }
            if te.is_empty() || tr_x.is_empty() {
                continue;
            }
            let model = fit(&tr_x, &tr_y, dim, lambda, opts);
            let correct = te.iter().filter(|&&i| (model.decision(rows[i]) > 0.0) == labels[i]).count();
            fold_acc.push(correct as f64 / te.len() as f64);
        }
        accuracies.push(if fold_acc.is_empty() {
            0.0
        } else {
            fold_acc.iter().sum::<f64>() / fold_acc.len() as f64
        });
    }
    let mut best = 0;
    for (i, &a) in accuracies.iter().enumerate() {
        if a >= accuracies[best] {
            best = i;
        }
    }
    CvOutcome {
        lambda: grid.get(best).copied().unwrap_or(1.0),
        accuracies,
    }
}
