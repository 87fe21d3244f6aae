//! Two-layer GCN forward pass, masked cross-entropy and analytic gradients.
//!
//! ```text
//! A1 = Â · drop(X) · Θ0        Z1 = ReLU(A1)
//! L  = Â · drop(Z1) · Θ1       P  = softmax_rows(L)
//! ```
//!
//! With one-hot features `drop(X)` is a diagonal matrix, so `drop(X) · Θ0` is
//! `Θ0` with rows scaled by the dropout multipliers and `X` never exists.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{HeteroGraph, NodeFeatures};
use crate::numerics::{dropout_mask, glorot_init, softmax_rows, DenseMatrix, RandomSource};

/// Probabilities below this are clamped before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnParams {
    /// `F × H`
    pub theta0: DenseMatrix,
    /// `H × C`
    pub theta1: DenseMatrix,
}

impl GcnParams {
    pub fn init(feature_dim: usize, hidden: usize, classes: usize, rng: &mut RandomSource) -> Self {
        let theta0 = glorot_init(feature_dim, hidden, rng);
        let theta1 = glorot_init(hidden, classes, rng);
        Self { theta0, theta1 }
    }

    pub fn n_classes(&self) -> usize {
        self.theta1.cols()
    }

    fn check(&self, graph: &HeteroGraph, x: &NodeFeatures) -> Result<()> {
        if x.n_nodes() != graph.n_nodes() {
            return Err(Error::dims(
                "gcn",
                format!("{} feature rows for {} nodes", x.n_nodes(), graph.n_nodes()),
            ));
        }
        if x.dim() != self.theta0.rows() {
            return Err(Error::dims(
                "gcn",
                format!(
                    "feature dim {} but theta0 has {} rows",
                    x.dim(),
                    self.theta0.rows()
                ),
            ));
        }
        if self.theta0.cols() != self.theta1.rows() {
            return Err(Error::dims(
                "gcn",
                format!(
                    "theta0 is {:?}, theta1 is {:?}",
                    self.theta0.shape(),
                    self.theta1.shape()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum InputDrop {
    None,
    /// Dropout multipliers on the diagonal of the one-hot identity.
    OneHot(Vec<f64>),
    Dense(DenseMatrix),
}

/// Intermediates of a forward pass needed by [`gcn_backward`].
#[derive(Debug, Clone)]
pub struct GcnCache {
    input: InputDrop,
    pre_activation: DenseMatrix,
    hidden_dropped: DenseMatrix,
    hidden_mask: Option<Vec<f64>>,
    pub probs: DenseMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnGrads {
    pub theta0: DenseMatrix,
    pub theta1: DenseMatrix,
}

/// Runs the network. Dropout at `rate` is applied to the input of both layers
/// when `training` is set; masks are drawn from `rng` and kept in the cache.
pub fn gcn_forward(
    graph: &HeteroGraph,
    x: &NodeFeatures,
    params: &GcnParams,
    rate: f64,
    rng: &mut RandomSource,
    training: bool,
) -> Result<GcnCache> {
    if !graph.is_normalized() {
        return Err(Error::invalid("gcn_forward needs a normalized adjacency"));
    }
    params.check(graph, x)?;
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::invalid(format!(
            "dropout rate {rate} outside [0, 1)"
        )));
    }
    let adj = graph.adjacency();
    let dropping = training && rate > 0.0;

    let (input, projected): (InputDrop, Cow<'_, DenseMatrix>) = match x {
        NodeFeatures::OneHot { n_nodes } if dropping => {
            let m = dropout_mask(*n_nodes, rate, rng);
            let p = params.theta0.scale_rows(&m)?;
            (InputDrop::OneHot(m), Cow::Owned(p))
        }
        NodeFeatures::OneHot { .. } => (InputDrop::None, Cow::Borrowed(&params.theta0)),
        NodeFeatures::Dense(feats) if dropping => {
            let m = dropout_mask(feats.rows() * feats.cols(), rate, rng);
            let mut d = feats.clone();
            d.as_mut_slice()
                .iter_mut()
                .zip(&m)
                .for_each(|(v, s)| *v *= s);
            let p = d.matmul(&params.theta0)?;
            (InputDrop::Dense(d), Cow::Owned(p))
        }
        NodeFeatures::Dense(feats) => (InputDrop::None, Cow::Owned(feats.matmul(&params.theta0)?)),
    };
    let pre_activation = adj.spmm(&projected)?;
    drop(projected);

    let mut hidden_dropped = pre_activation.map(|v| v.max(0.0));
    let hidden_mask = if dropping {
        let m = dropout_mask(hidden_dropped.rows() * hidden_dropped.cols(), rate, rng);
        hidden_dropped
            .as_mut_slice()
            .iter_mut()
            .zip(&m)
            .for_each(|(v, s)| *v *= s);
        Some(m)
    } else {
        None
    };
    let logits = adj.spmm(&hidden_dropped.matmul(&params.theta1)?)?;
    let probs = softmax_rows(&logits);
    Ok(GcnCache {
        input,
        pre_activation,
        hidden_dropped,
        hidden_mask,
        probs,
    })
}

fn check_labels(n: usize, c: usize, labels: &[usize], mask: &[bool]) -> Result<usize> {
    if labels.len() != n || mask.len() != n {
        return Err(Error::dims(
            "masked loss",
            format!(
                "{} labels / {} mask flags for {n} rows",
                labels.len(),
                mask.len()
            ),
        ));
    }
    let mut count = 0;
    for (i, (&y, &m)) in labels.iter().zip(mask).enumerate() {
        if m {
            if y >= c {
                return Err(Error::invalid(format!(
                    "label {y} of masked row {i} outside [0, {c})"
                )));
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::invalid("mask selects no rows"));
    }
    Ok(count)
}

/// Mean negative log-likelihood over the masked rows.
pub fn masked_cross_entropy(probs: &DenseMatrix, labels: &[usize], mask: &[bool]) -> Result<f64> {
    let count = check_labels(probs.rows(), probs.cols(), labels, mask)?;
    let sum: f64 = (0..probs.rows())
        .filter(|&i| mask[i])
        .map(|i| -probs.get(i, labels[i]).max(PROB_FLOOR).ln())
        .sum();
    Ok(sum / count as f64)
}

/// Exact gradients of [`masked_cross_entropy`] through both layers, reusing
/// the dropout masks recorded in `cache`.
pub fn gcn_backward(
    graph: &HeteroGraph,
    x: &NodeFeatures,
    params: &GcnParams,
    cache: &GcnCache,
    labels: &[usize],
    mask: &[bool],
) -> Result<GcnGrads> {
    params.check(graph, x)?;
    let probs = &cache.probs;
    if probs.rows() != graph.n_nodes() || probs.cols() != params.n_classes() {
        return Err(Error::dims(
            "gcn_backward",
            "cache does not match the graph or parameters",
        ));
    }
    let count = check_labels(probs.rows(), probs.cols(), labels, mask)?;
    let adj = graph.adjacency();

    // dLoss/dLogits: (P - Y) / |mask| on masked rows. A clamped probability
    // has zero derivative.
    let mut g_logits = DenseMatrix::zeros(probs.rows(), probs.cols());
    let inv = 1.0 / count as f64;
    for i in (0..probs.rows()).filter(|&i| mask[i]) {
        if probs.get(i, labels[i]) < PROB_FLOOR {
            continue;
        }
        let row = g_logits.row_mut(i);
        row.copy_from_slice(probs.row(i));
        row[labels[i]] -= 1.0;
        row.iter_mut().for_each(|v| *v *= inv);
    }
    // Â is symmetric, so Âᵀ G = Â G.
    let g_q = adj.spmm(&g_logits)?;
    drop(g_logits);
    let theta1 = cache.hidden_dropped.t_matmul(&g_q)?;
    let mut g_hidden = g_q.matmul_t(&params.theta1)?;
    drop(g_q);
    if let Some(m) = &cache.hidden_mask {
        g_hidden
            .as_mut_slice()
            .iter_mut()
            .zip(m)
            .for_each(|(g, s)| *g *= s);
    }
    g_hidden
        .as_mut_slice()
        .iter_mut()
        .zip(cache.pre_activation.as_slice())
        .for_each(|(g, &a)| {
            if a <= 0.0 {
                *g = 0.0
            }
        });
    let g_projected = adj.spmm(&g_hidden)?;
    drop(g_hidden);
    let theta0 = match (&cache.input, x) {
        (InputDrop::None, NodeFeatures::OneHot { .. }) => g_projected,
        (InputDrop::OneHot(m), _) => g_projected.scale_rows(m)?,
        (InputDrop::Dense(d), _) => d.t_matmul(&g_projected)?,
        (InputDrop::None, NodeFeatures::Dense(feats)) => feats.t_matmul(&g_projected)?,
    };
    Ok(GcnGrads { theta0, theta1 })
}
