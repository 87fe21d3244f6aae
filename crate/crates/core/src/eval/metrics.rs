use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification metrics. `confusion[gold][predicted]` counts samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class_f1: Vec<f64>,
    pub macro_f1: f64,
    pub confusion: Vec<Vec<u64>>,
}

/// Accuracy, per-class F1 and their unweighted mean.
///
/// A class with no true positives gets F1 = 0, including a class that is
/// absent from both predictions and gold labels.
pub fn compute_metrics(
    predictions: &[usize],
    golds: &[usize],
    n_classes: usize,
) -> Result<Metrics> {
    if predictions.is_empty() {
        return Err(Error::invalid("cannot compute metrics over zero samples"));
    }
    if predictions.len() != golds.len() {
        return Err(Error::dims(
            "compute_metrics",
            format!("{} predictions, {} golds", predictions.len(), golds.len()),
        ));
    }
    let mut confusion = vec![vec![0u64; n_classes]; n_classes];
    for (&p, &g) in predictions.iter().zip(golds) {
        if p >= n_classes || g >= n_classes {
            return Err(Error::invalid(format!(
                "label outside [0, {n_classes}): pred {p}, gold {g}"
            )));
        }
        confusion[g][p] += 1;
    }
    let total = predictions.len() as f64;
    let correct: u64 = (0..n_classes).map(|c| confusion[c][c]).sum();
    let per_class_f1: Vec<f64> = (0..n_classes)
        .map(|c| {
            let tp = confusion[c][c] as f64;
            let predicted: u64 = (0..n_classes).map(|g| confusion[g][c]).sum();
            let actual: u64 = confusion[c].iter().sum();
            // 2PR/(P+R) simplifies to 2tp/(predicted+actual).
            if tp == 0.0 {
                0.0
            } else {
                2.0 * tp / (predicted + actual) as f64
            }
        })
        .collect();
    let macro_f1 = if n_classes == 0 {
        0.0
    } else {
        per_class_f1.iter().sum::<f64>() / n_classes as f64
    };
    Ok(Metrics {
        accuracy: correct as f64 / total,
        per_class_f1,
        macro_f1,
        confusion,
    })
}
