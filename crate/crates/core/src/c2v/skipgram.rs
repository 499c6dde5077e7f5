//! Full-softmax skip-gram over walk corpora.
//!
//! Node vectors play both the centre and the context role (one matrix `H`), and
//! `P(j | i) = exp(h_j·h_i) / Σ_k exp(h_k·h_i)` over all nodes.
//!
//! The objective only depends on the corpus through centre/context co-occurrence
//! counts, so training counts the pairs once and then runs stochastic gradient descent
//! where one step covers every pair sharing a centre node (mean gradient over those
//! pairs). That keeps the exact softmax affordable: one step costs O(n·d).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::embedding::EmbeddingMatrix;
use super::walk::WalkCorpus;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, log_sum_exp, softmax_in_place, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    /// Initial step size on each centre's mean pair gradient, decayed linearly to `lr * 1e-4`.
    pub lr: f64,
    /// Standard deviation of the Gaussian initialisation.
    pub init_std: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 64,
            window: 5,
            epochs: 5,
            lr: 0.5,
            init_std: 0.1,
            seed: 1,
        }
    }
}

/// Centre/context pair counts within a window.
#[derive(Debug, Clone, PartialEq)]
pub struct CoOccurrence {
    /// Per centre: (context, count), sorted by context.
    pub contexts: Vec<Vec<(usize, f64)>>,
    pub totals: Vec<f64>,
    pub pairs: f64,
}

pub fn cooccurrence(corpus: &WalkCorpus, n: usize, window: usize) -> Result<CoOccurrence> {
    let mut dense: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
    for walk in &corpus.sequences {
        for (pos, &center) in walk.iter().enumerate() {
            if center >= n {
                return Err(Error::invalid(format!("walk node {center} out of range")));
            }
            let lo = pos.saturating_sub(window);
            let hi = (pos + window).min(walk.len() - 1);
            for (q, &ctx) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                if q != pos {
                    *dense[center].entry(ctx).or_insert(0.0) += 1.0;
                }
            }
        }
    }
    let contexts: Vec<Vec<(usize, f64)>> =
        dense.into_iter().map(|m| m.into_iter().collect()).collect();
    let totals: Vec<f64> = contexts
        .iter()
        .map(|c| c.iter().map(|x| x.1).sum())
        .collect();
    let pairs = totals.iter().sum();
    Ok(CoOccurrence {
        contexts,
        totals,
        pairs,
    })
}

/// `P(· | center)` over every node.
pub fn context_distribution<T: Scalar>(h: &Matrix<T>, center: usize) -> Vec<T> {
    let hi = h.row(center);
    let mut p: Vec<T> = h.rows_iter().map(|hk| dot(hk, hi)).collect();
    softmax_in_place(&mut p);
    p
}

/// `-log P(context | center)`.
pub fn pair_loss<T: Scalar>(h: &Matrix<T>, center: usize, context: usize) -> T {
    let hi = h.row(center);
    let logits: Vec<T> = h.rows_iter().map(|hk| dot(hk, hi)).collect();
    log_sum_exp(&logits) - logits[context]
}

/// Loss `Σ_c w_c · (-log P(c | center))` and its gradient with respect to all of `H`.
pub fn center_loss_and_grad<T: Scalar>(
    h: &Matrix<T>,
    center: usize,
    contexts: &[(usize, T)],
) -> (T, Matrix<T>) {
    let mut grad = Matrix::zeros(h.rows(), h.cols());
    let loss = accumulate_center(h, center, contexts, T::one(), &mut grad);
    (loss, grad)
}

/// Gradient of a single pair's loss; see [`pair_loss`].
pub fn pair_loss_and_grad<T: Scalar>(
    h: &Matrix<T>,
    center: usize,
    context: usize,
) -> (T, Matrix<T>) {
    center_loss_and_grad(h, center, &[(context, T::one())])
}

fn accumulate_center<T: Scalar>(
    h: &Matrix<T>,
    center: usize,
    contexts: &[(usize, T)],
    scale: T,
    grad: &mut Matrix<T>,
) -> T {
    let hi = h.row(center).to_vec();
    let logits: Vec<T> = h.rows_iter().map(|hk| dot(hk, &hi)).collect();
    let lse = log_sum_exp(&logits);
    let total: T = contexts.iter().map(|c| c.1).sum();
    let mut loss = total * lse;
    // per-row coefficient g_k = total * p_k - w_k
    let mut coef: Vec<T> = logits.iter().map(|&l| total * (l - lse).exp()).collect();
    for &(c, w) in contexts {
        coef[c] = coef[c] - w;
        loss = loss - w * logits[c];
    }
    let mut center_grad = vec![T::zero(); h.cols()];
    for (k, &g) in coef.iter().enumerate() {
        axpy(g * scale, h.row(k), &mut center_grad);
        axpy(g * scale, &hi, grad.row_mut(k));
    }
    axpy(T::one(), &center_grad, grad.row_mut(center));
    loss * scale
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramReport {
    /// Mean per-pair loss seen during each epoch.
    pub epoch_losses: Vec<f64>,
}

pub fn init_embeddings<T: Scalar>(n: usize, dim: usize, std: f64, seed: u64) -> Matrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std.max(0.0)).expect("valid std");
    Matrix::from_fn(n, dim, |_, _| T::of(normal.sample(&mut rng)))
}

pub fn skipgram_train<T: Scalar>(
    corpus: &WalkCorpus,
    n: usize,
    cfg: &SkipGramConfig,
) -> Result<(EmbeddingMatrix<T>, SkipGramReport)> {
    if cfg.dim < 2 || cfg.window < 1 {
        return Err(Error::invalid("skip-gram needs dim >= 2 and window >= 1"));
    }
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(Error::invalid(format!(
            "skip-gram learning rate {} must be positive",
            cfg.lr
        )));
    }
    let co = cooccurrence(corpus, n, cfg.window)?;
    let mut h = init_embeddings::<T>(n, cfg.dim, cfg.init_std, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));

    let centers: Vec<usize> = (0..n).filter(|&i| co.totals[i] > 0.0).collect();
    let weighted: Vec<Vec<(usize, T)>> = co
        .contexts
        .iter()
        .map(|c| c.iter().map(|&(j, w)| (j, T::of(w))).collect())
        .collect();
    let total_steps = (cfg.epochs * centers.len()).max(1) as f64;
    let mut step = 0usize;
    let mut report = SkipGramReport {
        epoch_losses: Vec::with_capacity(cfg.epochs),
    };
    let mut order = centers.clone();
    let mut hi = vec![T::zero(); cfg.dim];
    let mut center_grad = vec![T::zero(); cfg.dim];
    let mut coef = vec![T::zero(); n];

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &i in &order {
            let lr = cfg.lr * (1.0 - (step as f64 / total_steps) * (1.0 - 1e-4));
            step += 1;
            let total = co.totals[i];
            hi.copy_from_slice(h.row(i));
            for (k, c) in coef.iter_mut().enumerate() {
                *c = dot(h.row(k), &hi);
            }
            let lse = log_sum_exp(&coef);
            let t_total = T::of(total);
            let mut loss = t_total * lse;
            for c in coef.iter_mut() {
                *c = t_total * (*c - lse).exp();
            }
            for &(c, w) in &weighted[i] {
                loss = loss - w * (dot(h.row(c), &hi));
                coef[c] = coef[c] - w;
            }
            epoch_loss += loss.as_f64();

            let scale = T::of(-lr / total);
            center_grad.iter_mut().for_each(|x| *x = T::zero());
            for (k, &g) in coef.iter().enumerate() {
                axpy(g, h.row(k), &mut center_grad);
            }
            for (k, &g) in coef.iter().enumerate() {
                axpy(g * scale, &hi, h.row_mut(k));
            }
            axpy(scale, &center_grad, h.row_mut(i));
        }
        let mean = epoch_loss / co.pairs.max(1.0);
        if !mean.is_finite() || !h.all_finite() {
            return Err(Error::NonFinite(format!(
                "skip-gram loss diverged in epoch {} (lr = {}, dim = {})",
                epoch + 1,
                cfg.lr,
                cfg.dim
            )));
        }
        report.epoch_losses.push(mean);
    }
    Ok((EmbeddingMatrix::new(h)?, report))
}

/// Mean per-pair loss of `h` over the whole corpus.
pub fn corpus_loss<T: Scalar>(h: &Matrix<T>, co: &CoOccurrence) -> f64 {
    let mut total = 0.0;
    for (i, ctx) in co.contexts.iter().enumerate() {
        if ctx.is_empty() {
            continue;
        }
        let hi = h.row(i);
        let logits: Vec<T> = h.rows_iter().map(|hk| dot(hk, hi)).collect();
        let lse = log_sum_exp(&logits).as_f64();
        for &(c, w) in ctx {
            total += w * (lse - logits[c].as_f64());
        }
    }
    total / co.pairs.max(1.0)
}
