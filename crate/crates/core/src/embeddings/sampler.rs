use crate::error::{Error, Result};
use crate::numerics::RandomSource;

pub const UNIGRAM_POWER: f64 = 0.75;

/// Draws negative samples from the unigram distribution raised to 0.75.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
    rng: RandomSource,
}

impl NegativeSampler {
    pub fn new(counts: &[u64], rng: RandomSource) -> Result<Self> {
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| (c as f64).powf(UNIGRAM_POWER))
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid(
                "negative sampler needs at least one non-zero count",
            ));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        // Guard the top bucket against rounding in the running sum.
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self { cumulative, rng })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample(&mut self) -> usize {
        let u = self.rng.uniform();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}
