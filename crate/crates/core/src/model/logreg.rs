//! Multinomial logistic regression fitted by full-batch gradient descent.
//!
//! Objective: `(1/n) Σ −ln p(y_i | x_i) + (λ/2)‖W‖²`. The bias is not
//! regularised. The step is `0.5 / L` where `L = 0.5·λmax(X̃ᵀX̃/n) + λ`
//! bounds the curvature and `X̃` is `X` with a column of ones appended.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{softmax_rows, DenseMatrix, SparseMatrix};

use super::gcn::PROB_FLOOR;
use super::predict::argmax_rows;

const POWER_ITERATIONS: usize = 100;

/// Sample-by-feature design matrix. Sparse inputs keep their transpose so
/// both products are row-parallel.
#[derive(Debug, Clone)]
pub enum FeatureMatrix {
    Dense(DenseMatrix),
    Sparse {
        matrix: SparseMatrix,
        transpose: SparseMatrix,
    },
}

impl FeatureMatrix {
    pub fn sparse(matrix: SparseMatrix) -> Self {
        let transpose = matrix.transpose();
        FeatureMatrix::Sparse { matrix, transpose }
    }

    pub fn rows(&self) -> usize {
        match self {
            FeatureMatrix::Dense(m) => m.rows(),
            FeatureMatrix::Sparse { matrix, .. } => matrix.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            FeatureMatrix::Dense(m) => m.cols(),
            FeatureMatrix::Sparse { matrix, .. } => matrix.cols(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            FeatureMatrix::Dense(m) => m.is_finite(),
            FeatureMatrix::Sparse { matrix, .. } => matrix.values().iter().all(|v| v.is_finite()),
        }
    }

    /// `X · rhs`
    pub fn times(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            FeatureMatrix::Dense(m) => m.matmul(rhs),
            FeatureMatrix::Sparse { matrix, .. } => matrix.spmm(rhs),
        }
    }

    /// `Xᵀ · rhs`
    pub fn t_times(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            FeatureMatrix::Dense(m) => m.t_matmul(rhs),
            FeatureMatrix::Sparse { transpose, .. } => transpose.spmm(rhs),
        }
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<FeatureMatrix> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.rows()) {
            return Err(Error::invalid(format!(
                "row {bad} outside a {}-row feature matrix",
                self.rows()
            )));
        }
        Ok(match self {
            FeatureMatrix::Dense(m) => {
                FeatureMatrix::Dense(DenseMatrix::from_fn(rows.len(), m.cols(), |i, j| {
                    m.get(rows[i], j)
                }))
            }
            FeatureMatrix::Sparse { matrix, .. } => {
                let triplets = rows
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &r)| matrix.row(r).map(move |(j, v)| (i, j, v)))
                    .collect();
                FeatureMatrix::sparse(SparseMatrix::from_triplets(
                    rows.len(),
                    matrix.cols(),
                    triplets,
                )?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    /// `F × C`
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub lambda: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            tolerance: 1e-6,
            max_iterations: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogRegFit {
    pub params: LogRegParams,
    pub iterations: usize,
    pub converged: bool,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegGrads {
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
}

impl LogRegParams {
    pub fn zeros(features: usize, classes: usize, lambda: f64) -> Self {
        Self {
            weights: DenseMatrix::zeros(features, classes),
            bias: vec![0.0; classes],
            lambda,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.weights.cols()
    }

    pub fn probabilities(&self, x: &FeatureMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.weights.rows() {
            return Err(Error::dims(
                "logreg",
                format!(
                    "{} features, weights have {} rows",
                    x.cols(),
                    self.weights.rows()
                ),
            ));
        }
        let mut logits = x.times(&self.weights)?;
        for i in 0..logits.rows() {
            logits
                .row_mut(i)
                .iter_mut()
                .zip(&self.bias)
                .for_each(|(z, b)| *z += b);
        }
        Ok(softmax_rows(&logits))
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.probabilities(x)?))
    }
}

fn check_labels(labels: &[usize], rows: usize, classes: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::dims(
            "logreg",
            format!("{} labels for {rows} samples", labels.len()),
        ));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::invalid(format!("label {y} outside [0, {classes})")));
    }
    Ok(())
}

/// Regularised loss and its exact gradient.
pub fn logreg_loss_and_grad(
    params: &LogRegParams,
    x: &FeatureMatrix,
    labels: &[usize],
) -> Result<(f64, LogRegGrads)> {
    let n = x.rows();
    check_labels(labels, n, params.n_classes())?;
    if n == 0 {
        return Err(Error::invalid("logreg needs at least one sample"));
    }
    let probs = params.probabilities(x)?;
    let inv = 1.0 / n as f64;
    let mut nll = 0.0;
    let mut residual = probs;
    for (i, &y) in labels.iter().enumerate() {
        let p = residual.get(i, y);
        nll -= p.max(PROB_FLOOR).ln();
        let row = residual.row_mut(i);
        if p < PROB_FLOOR {
            row.iter_mut().for_each(|v| *v = 0.0);
            continue;
        }
        row[y] -= 1.0;
        row.iter_mut().for_each(|v| *v *= inv);
    }
    let norm_sq: f64 = params.weights.as_slice().iter().map(|w| w * w).sum();
    let loss = nll * inv + 0.5 * params.lambda * norm_sq;
    let mut weights = x.t_times(&residual)?;
    weights
        .as_mut_slice()
        .iter_mut()
        .zip(params.weights.as_slice())
        .for_each(|(g, w)| *g += params.lambda * w);
    let mut bias = vec![0.0; params.n_classes()];
    for i in 0..n {
        bias.iter_mut()
            .zip(residual.row(i))
            .for_each(|(b, r)| *b += r);
    }
    Ok((loss, LogRegGrads { weights, bias }))
}

/// Largest eigenvalue of `X̃ᵀX̃ / n` by power iteration from the all-ones
/// vector.
pub fn design_spectral_radius(x: &FeatureMatrix) -> Result<f64> {
    let n = x.rows() as f64;
    let f = x.cols();
    let mut v = DenseMatrix::from_fn(f, 1, |_, _| 1.0);
    let mut v_bias = 1.0;
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let mut u = x.times(&v)?;
        u.as_mut_slice().iter_mut().for_each(|e| *e += v_bias);
        let mut w = x.t_times(&u)?;
        w.as_mut_slice().iter_mut().for_each(|e| *e /= n);
        let w_bias = u.as_slice().iter().sum::<f64>() / n;
        let norm = (w.as_slice().iter().map(|e| e * e).sum::<f64>() + w_bias * w_bias).sqrt();
        let v_norm = (v.as_slice().iter().map(|e| e * e).sum::<f64>() + v_bias * v_bias).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = norm / v_norm;
        v = w.map(|e| e / norm);
        v_bias = w_bias / norm;
        let settled = (next - estimate).abs() <= 1e-10 * next;
        estimate = next;
        if settled {
            break;
        }
    }
    Ok(estimate)
}

/// Fits from zero initialisation. The procedure draws no randomness, so
/// identical inputs always give identical parameters.
pub fn train_logreg(
    x: &FeatureMatrix,
    labels: &[usize],
    n_classes: usize,
    config: &LogRegConfig,
) -> Result<LogRegFit> {
    if !x.is_finite() {
        return Err(Error::invalid("logreg features contain non-finite values"));
    }
    check_labels(labels, x.rows(), n_classes)?;
    if x.rows() < n_classes {
        return Err(Error::invalid(format!(
            "{} samples for {n_classes} classes",
            x.rows()
        )));
    }
    if !(config.lambda >= 0.0 && config.lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be non-negative, got {}",
            config.lambda
        )));
    }
    let curvature = 0.5 * design_spectral_radius(x)? + config.lambda;
    let step = if curvature > 0.0 {
        0.5 / curvature
    } else {
        1.0
    };

    let mut params = LogRegParams::zeros(x.cols(), n_classes, config.lambda);
    let (mut loss, mut grads) = logreg_loss_and_grad(&params, x, labels)?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        params
            .weights
            .as_mut_slice()
            .iter_mut()
            .zip(grads.weights.as_slice())
            .for_each(|(w, g)| *w -= step * g);
        params
            .bias
            .iter_mut()
            .zip(&grads.bias)
            .for_each(|(b, g)| *b -= step * g);
        iterations += 1;
        let (next, next_grads) = logreg_loss_and_grad(&params, x, labels)?;
        let delta = (loss - next).abs();
        loss = next;
        grads = next_grads;
        if delta < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok(LogRegFit {
        params,
        iterations,
        converged,
        loss,
    })
}
