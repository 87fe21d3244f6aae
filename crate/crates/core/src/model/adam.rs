use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moment buffers, one pair per parameter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first: Vec<DenseMatrix>,
    second: Vec<DenseMatrix>,
    step: u64,
}

impl AdamState {
    pub fn new(shapes: &[(usize, usize)]) -> Self {
        let zeros = || {
            shapes
                .iter()
                .map(|&(r, c)| DenseMatrix::zeros(r, c))
                .collect()
        };
        Self {
            first: zeros(),
            second: zeros(),
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// Bias-corrected Adam update applied in place to each parameter matrix.
pub fn adam_step(
    params: &mut [&mut DenseMatrix],
    grads: &[&DenseMatrix],
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.first.len() {
        return Err(Error::dims(
            "adam_step",
            format!(
                "{} params, {} grads, {} buffers",
                params.len(),
                grads.len(),
                state.first.len()
            ),
        ));
    }
    for (k, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.shape() != g.shape() || p.shape() != state.first[k].shape() {
            return Err(Error::dims(
                "adam_step",
                format!("parameter {k}: {:?} vs gradient {:?}", p.shape(), g.shape()),
            ));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = state.first[k].as_mut_slice();
        let v = state.second[k].as_mut_slice();
        for (((w, &g), m), v) in p.as_mut_slice().iter_mut().zip(g.as_slice()).zip(m).zip(v) {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *w -= lr * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = DenseMatrix::zeros(2, 3);
        let g = DenseMatrix::from_fn(2, 3, |_, _| 1.0);
        let mut s = AdamState::new(&[(2, 3)]);
        adam_step(&mut [&mut p], &[&g], &mut s, 0.02).unwrap();
        assert!(p.as_slice().iter().all(|&w| (w + 0.02).abs() < 1e-6));
        assert_eq!(s.step(), 1);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = DenseMatrix::from_fn(2, 2, |i, j| (i + 2 * j) as f64);
        let before = p.clone();
        let mut s = AdamState::new(&[(2, 2)]);
        adam_step(&mut [&mut p], &[&DenseMatrix::zeros(2, 2)], &mut s, 0.02).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn identical_sequences_match() {
        let run = || {
            let mut p = DenseMatrix::zeros(1, 2);
            let mut s = AdamState::new(&[(1, 2)]);
            for k in 0..5 {
                let g = DenseMatrix::from_fn(1, 2, |_, j| (k as f64 - 2.0) * (j as f64 + 0.5));
                adam_step(&mut [&mut p], &[&g], &mut s, 0.02).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut p = DenseMatrix::zeros(2, 2);
        let mut s = AdamState::new(&[(2, 2)]);
        assert!(adam_step(&mut [&mut p], &[&DenseMatrix::zeros(2, 3)], &mut s, 0.1).is_err());
    }
}
