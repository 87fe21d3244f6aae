//! GCN classifier and the logistic-regression baseline.

mod adam;
mod checkpoint;
mod gcn;
mod logreg;
mod predict;
mod train;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CheckpointHeader,
    TensorEntry,
};
pub use gcn::{
    gcn_backward, gcn_forward, masked_cross_entropy, GcnCache, GcnGrads, GcnParams, PROB_FLOOR,
};
pub use logreg::{
    design_spectral_radius, logreg_loss_and_grad, train_logreg, FeatureMatrix, LogRegConfig,
    LogRegFit, LogRegGrads, LogRegParams,
};
pub use predict::{argmax, argmax_rows};
pub use train::{
    gcn_predict, gcn_probabilities, train_gcn, EpochRecord, GcnTrainOutcome, TrainConfig,
};
