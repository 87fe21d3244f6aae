use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::compute_metrics;
use crate::graph::{HeteroGraph, NodeFeatures};
use crate::numerics::{DenseMatrix, RandomSource};

use super::adam::{adam_step, AdamState};
use super::gcn::{gcn_backward, gcn_forward, masked_cross_entropy, GcnParams};
use super::predict::{argmax, argmax_rows};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout: f64,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.02,
            epochs: 100,
            dropout: 0.5,
            hidden: 200,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.hidden == 0 {
            return Err(Error::invalid("epochs and hidden size must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Loss of the training-mode forward pass before this epoch's update.
    pub train_loss: f64,
    pub val_accuracy: f64,
    pub val_macro_f1: f64,
}

#[derive(Debug, Clone)]
pub struct GcnTrainOutcome {
    /// Snapshot with the highest validation macro F1, earliest on ties.
    pub best: GcnParams,
    pub best_epoch: usize,
    /// Parameters after the final update.
    pub last: GcnParams,
    pub history: Vec<EpochRecord>,
}

/// Class probabilities with dropout disabled.
pub fn gcn_probabilities(
    graph: &HeteroGraph,
    x: &NodeFeatures,
    params: &GcnParams,
) -> Result<DenseMatrix> {
    // Inference draws no randomness; the source is a placeholder.
    let mut rng = RandomSource::new(0);
    Ok(gcn_forward(graph, x, params, 0.0, &mut rng, false)?.probs)
}

pub fn gcn_predict(
    graph: &HeteroGraph,
    x: &NodeFeatures,
    params: &GcnParams,
) -> Result<Vec<usize>> {
    Ok(argmax_rows(&gcn_probabilities(graph, x, params)?))
}

/// Full-batch training: one Adam update per epoch over the whole graph.
///
/// `labels` has one entry per node; only rows under `train_mask` feed the
/// loss and only rows under `val_mask` feed model selection.
pub fn train_gcn(
    graph: &HeteroGraph,
    x: &NodeFeatures,
    labels: &[usize],
    n_classes: usize,
    train_mask: &[bool],
    val_mask: &[bool],
    config: &TrainConfig,
) -> Result<GcnTrainOutcome> {
    config.validate()?;
    let n = graph.n_nodes();
    if labels.len() != n || train_mask.len() != n || val_mask.len() != n {
        return Err(Error::dims(
            "train_gcn",
            format!(
                "{} labels, masks {}/{} for {n} nodes",
                labels.len(),
                train_mask.len(),
                val_mask.len()
            ),
        ));
    }
    if train_mask.iter().zip(val_mask).any(|(&t, &v)| t && v) {
        return Err(Error::invalid("training and validation masks overlap"));
    }
    let val_rows: Vec<usize> = (0..n).filter(|&i| val_mask[i]).collect();
    if val_rows.is_empty() {
        return Err(Error::invalid("validation mask selects no rows"));
    }
    let val_gold: Vec<usize> = val_rows.iter().map(|&i| labels[i]).collect();

    let root = RandomSource::new(config.seed);
    let mut params = GcnParams::init(
        x.dim(),
        config.hidden,
        n_classes,
        &mut root.substream("model"),
    );
    let mut dropout_rng = root.substream("dropout");
    let mut adam = AdamState::new(&[params.theta0.shape(), params.theta1.shape()]);

    let mut best: Option<(f64, usize, GcnParams)> = None;
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let cache = gcn_forward(graph, x, &params, config.dropout, &mut dropout_rng, true)?;
        let train_loss = masked_cross_entropy(&cache.probs, labels, train_mask)?;
        let grads = gcn_backward(graph, x, &params, &cache, labels, train_mask)?;
        drop(cache);
        adam_step(
            &mut [&mut params.theta0, &mut params.theta1],
            &[&grads.theta0, &grads.theta1],
            &mut adam,
            config.learning_rate,
        )?;
        if !(params.theta0.is_finite() && params.theta1.is_finite()) {
            return Err(Error::invalid(format!(
                "parameters diverged at epoch {epoch}"
            )));
        }

        let probs = gcn_probabilities(graph, x, &params)?;
        let val_pred: Vec<usize> = val_rows.iter().map(|&i| argmax(probs.row(i))).collect();
        let metrics = compute_metrics(&val_pred, &val_gold, n_classes)?;
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_accuracy: metrics.accuracy,
            val_macro_f1: metrics.macro_f1,
        });
        if best
            .as_ref()
            .is_none_or(|(f1, _, _)| metrics.macro_f1 > *f1)
        {
            best = Some((metrics.macro_f1, epoch, params.clone()));
        }
    }
    let (_, best_epoch, best) = best.expect("at least one epoch");
    Ok(GcnTrainOutcome {
        best,
        best_epoch,
        last: params,
        history,
    })
}
