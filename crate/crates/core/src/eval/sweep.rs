use serde::{Deserialize, Serialize};

use super::experiment::{Experiment, ExperimentConfig, ExperimentReport, MaskPolicy, ModelKind};
use crate::error::{Error, Result};

pub const DEFAULT_PROPORTIONS: [f64; 4] = [0.01, 0.05, 0.10, 0.20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub report: ExperimentReport,
}

/// One report per (x, model) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub name: String,
    pub x_label: String,
    pub points: Vec<SweepPoint>,
}

impl Experiment<'_> {
    /// Text GCN over several PPMI windows. `None` is the graph without
    /// word-word edges and is plotted at x = 0.
    pub fn sweep_window_size(
        &mut self,
        sizes: &[Option<usize>],
        base: &ExperimentConfig,
        seeds: &[u64],
    ) -> Result<Sweep> {
        if sizes.is_empty() {
            return Err(Error::invalid("window sweep needs at least one size"));
        }
        let mut points = Vec::with_capacity(sizes.len());
        for &window in sizes {
            let config = ExperimentConfig {
                window,
                ..base.clone()
            };
            let report = self.run_seeded(&config, seeds)?;
            points.push(SweepPoint {
                x: window.unwrap_or(0) as f64,
                report,
            });
        }
        Ok(Sweep {
            name: "window".into(),
            x_label: "window_size".into(),
            points,
        })
    }

    /// Every model at every proportion, with the labelled mask redrawn per
    /// seed.
    pub fn sweep_label_proportion(
        &mut self,
        proportions: &[f64],
        models: &[ModelKind],
        base: &ExperimentConfig,
        seeds: &[u64],
    ) -> Result<Sweep> {
        if proportions.is_empty() || models.is_empty() {
            return Err(Error::invalid(
                "label sweep needs at least one proportion and one model",
            ));
        }
        if let Some(p) = proportions.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::invalid(format!(
                "label proportion {p} outside (0, 1]"
            )));
        }
        let mut points = Vec::with_capacity(proportions.len() * models.len());
        for &p in proportions {
            for &model in models {
                let config = ExperimentConfig {
                    model,
                    label_proportion: p,
                    mask: MaskPolicy::PerSeed,
                    ..base.clone()
                };
                let report = self.run_seeded(&config, seeds)?;
                points.push(SweepPoint { x: p, report });
            }
        }
        Ok(Sweep {
            name: "labels".into(),
            x_label: "label_proportion".into(),
            points,
        })
    }
}
