use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DenseMatrix;

/// Seeded random stream.
///
/// Named substreams are derived by hashing the parent seed together with the
/// name (64-bit FNV-1a over the little-endian seed bytes followed by the UTF-8
/// name), so `RandomSource::new(s).substream("model")` is the same stream in
/// every run and independent of how much the parent has been consumed.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: impl IntoIterator<Item = u8>, mut hash: u64) -> u64 {
    for b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self, name: &str) -> RandomSource {
        let h = fnv1a(self.seed.to_le_bytes(), FNV_OFFSET);
        RandomSource::new(fnv1a(name.bytes(), h))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Glorot/Xavier uniform initialisation in `±sqrt(6 / (rows + cols))`.
pub fn glorot_init(rows: usize, cols: usize, rng: &mut RandomSource) -> DenseMatrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |_, _| (2.0 * rng.uniform() - 1.0) * bound)
}

/// Inverted-dropout multipliers: each entry is `0` with probability `rate`,
/// otherwise `1 / (1 - rate)`. A zero rate consumes no randomness.
pub fn dropout_mask(len: usize, rate: f64, rng: &mut RandomSource) -> Vec<f64> {
    assert!(
        (0.0..1.0).contains(&rate),
        "dropout rate must lie in [0, 1)"
    );
    if rate == 0.0 {
        return vec![1.0; len];
    }
    let keep = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| if rng.uniform() < rate { 0.0 } else { keep })
        .collect()
}

/// Inverted dropout; the identity when `training` is false or `rate` is zero.
pub fn dropout(m: &DenseMatrix, rate: f64, rng: &mut RandomSource, training: bool) -> DenseMatrix {
    if !training || rate == 0.0 {
        return m.clone();
    }
    let mask = dropout_mask(m.rows() * m.cols(), rate, rng);
    let mut out = m.clone();
    for (v, s) in out.as_mut_slice().iter_mut().zip(mask) {
        *v *= s;
    }
    out
}
