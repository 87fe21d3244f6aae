//! Metrics, seeded experiment runs, sweeps and report files.

mod experiment;
pub mod memory;
mod metrics;
mod report;
mod sweep;

pub use experiment::{
    build_graph, mean_std, Aggregate, EmbeddingRole, Experiment, ExperimentConfig,
    ExperimentReport, MaskPolicy, ModelKind, SeedRun, SeededOutcome, TrainedModel, VectorAggregate,
    DEFAULT_LABEL_PROPORTION, DEFAULT_SEEDS, DEFAULT_WINDOW,
};
pub use metrics::{compute_metrics, Metrics};
pub use report::{emit_report, load_reports, setting_label, METRICS_FILE, SUMMARY_FILE};
pub use sweep::{Sweep, SweepPoint, DEFAULT_PROPORTIONS};
