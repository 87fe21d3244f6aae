//! Skip-gram and paragraph-vector training with negative sampling.
//!
//! All trainers are single-threaded and visit documents in corpus order, so a
//! given seed always produces the same table.

use serde::{Deserialize, Serialize};

use super::sampler::NegativeSampler;
use super::table::{EmbeddingKind, EmbeddingTable};
use crate::corpus::{TokenId, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::RandomSource;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTrainConfig {
    pub dimension: usize,
    pub epochs: usize,
    pub window: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    /// Final step size of the linear decay.
    pub min_learning_rate: f64,
    pub min_count: u64,
}

impl Default for EmbeddingTrainConfig {
    fn default() -> Self {
        Self {
            dimension: 300,
            epochs: 20,
            window: 5,
            negatives: 5,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            min_count: 1,
        }
    }
}

impl EmbeddingTrainConfig {
    /// Defaults for the distributed-memory model (larger initial step).
    pub fn pvdm() -> Self {
        Self {
            learning_rate: 0.05,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs < 1 || self.dimension < 1 || self.negatives < 1 {
            return Err(Error::invalid(
                "embedding config needs epochs, dimension and negatives >= 1",
            ));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.min_learning_rate < 0.0
        {
            return Err(Error::invalid("embedding learning rates must be positive"));
        }
        Ok(())
    }
}

/// Linear decay from `start` to `floor` over `total` steps.
pub fn decayed_learning_rate(start: f64, floor: f64, step: u64, total: u64) -> f64 {
    if total == 0 {
        return start;
    }
    let frac = (step as f64 / total as f64).min(1.0);
    start + (floor - start) * frac
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss of one input vector against a set of output vectors:
/// `-Σ ln σ(s_k · v·u_k)` with `s_k = +1` for positives and `-1` otherwise.
pub fn ns_loss(input: &[f64], outputs: &[&[f64]], positive: &[bool]) -> f64 {
    outputs
        .iter()
        .zip(positive)
        .map(|(u, &pos)| {
            let z = dot(input, u);
            -(sigmoid(if pos { z } else { -z })).ln()
        })
        .sum()
}

/// Analytic gradients of [`ns_loss`] with respect to the input vector and
/// each output vector.
pub fn ns_gradients(
    input: &[f64],
    outputs: &[&[f64]],
    positive: &[bool],
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut g_in = vec![0.0; input.len()];
    let mut g_out = Vec::with_capacity(outputs.len());
    for (u, &pos) in outputs.iter().zip(positive) {
        let label = if pos { 1.0 } else { 0.0 };
        let coef = sigmoid(dot(input, u)) - label;
        for (g, x) in g_in.iter_mut().zip(*u) {
            *g += coef * x;
        }
        g_out.push(input.iter().map(|x| coef * x).collect());
    }
    (g_in, g_out)
}

/// One SGD step on the negative-sampling loss. Output rows in `out_table` are
/// updated in place; the step for the input vector is accumulated into
/// `input_step` (already scaled by `-lr`), for the caller to apply.
fn ns_step(
    input: &[f64],
    out_table: &mut [f64],
    dim: usize,
    targets: &[(usize, bool)],
    lr: f64,
    input_step: &mut [f64],
) {
    input_step.fill(0.0);
    for &(t, pos) in targets {
        let u = &mut out_table[t * dim..(t + 1) * dim];
        let label = if pos { 1.0 } else { 0.0 };
        let g = (label - sigmoid(dot(input, u))) * lr;
        for ((s, ui), xi) in input_step.iter_mut().zip(u.iter_mut()).zip(input) {
            *s += g * *ui;
            *ui += g * xi;
        }
    }
}

fn init_table(rows: usize, dim: usize, rng: &mut RandomSource) -> Vec<f64> {
    (0..rows * dim)
        .map(|_| (rng.uniform() - 0.5) / dim as f64)
        .collect()
}

struct Negatives {
    sampler: NegativeSampler,
    count: usize,
    buf: Vec<(usize, bool)>,
}

impl Negatives {
    fn fill(&mut self, positive: usize) -> &[(usize, bool)] {
        self.buf.clear();
        self.buf.push((positive, true));
        for _ in 0..self.count {
            let n = self.sampler.sample();
            if n != positive {
                self.buf.push((n, false));
            }
        }
        &self.buf
    }
}

struct Prepared {
    docs: Vec<Vec<usize>>,
    counts: Vec<u64>,
}

fn prepare(
    corpus: &[Vec<TokenId>],
    vocab_size: usize,
    config: &EmbeddingTrainConfig,
) -> Result<Prepared> {
    config.validate()?;
    if corpus.iter().all(Vec::is_empty) {
        return Err(Error::invalid("cannot train embeddings on an empty corpus"));
    }
    if vocab_size < 2 {
        return Err(Error::invalid(format!(
            "vocabulary of size {vocab_size} is too small to train embeddings"
        )));
    }
    let mut counts = vec![0u64; vocab_size];
    for &t in corpus.iter().flatten() {
        let t = t as usize;
        if t >= vocab_size {
            return Err(Error::invalid(format!(
                "token id {t} outside vocabulary of {vocab_size}"
            )));
        }
        counts[t] += 1;
    }
    let docs = corpus
        .iter()
        .map(|d| {
            d.iter()
                .map(|&t| t as usize)
                .filter(|&t| counts[t] >= config.min_count)
                .collect()
        })
        .collect();
    Ok(Prepared { docs, counts })
}

fn negatives(
    p: &Prepared,
    config: &EmbeddingTrainConfig,
    root: &RandomSource,
) -> Result<Negatives> {
    let counts: Vec<u64> = p
        .counts
        .iter()
        .map(|&c| if c >= config.min_count { c } else { 0 })
        .collect();
    Ok(Negatives {
        sampler: NegativeSampler::new(&counts, root.substream("sampler"))?,
        count: config.negatives,
        buf: Vec::with_capacity(config.negatives + 1),
    })
}

fn context_range(pos: usize, len: usize, window: usize) -> impl Iterator<Item = usize> {
    (pos.saturating_sub(window)..(pos + window + 1).min(len)).filter(move |&q| q != pos)
}

/// Skip-gram: each centre token's input vector predicts every token within
/// `window` positions of it. Returns the input-side vectors keyed by token.
pub fn train_skipgram(
    corpus: &[Vec<TokenId>],
    vocab: &Vocabulary,
    config: &EmbeddingTrainConfig,
    seed: u64,
) -> Result<EmbeddingTable> {
    let p = prepare(corpus, vocab.len(), config)?;
    let dim = config.dimension;
    let root = RandomSource::new(seed);
    let mut syn0 = init_table(vocab.len(), dim, &mut root.substream("init"));
    let mut syn1 = vec![0.0; vocab.len() * dim];
    let mut neg = negatives(&p, config, &root)?;

    let pairs_per_epoch: u64 = p
        .docs
        .iter()
        .map(|d| {
            (0..d.len())
                .map(|i| context_range(i, d.len(), config.window).count() as u64)
                .sum::<u64>()
        })
        .sum();
    let total = pairs_per_epoch * config.epochs as u64;
    let mut step = 0u64;
    let mut delta = vec![0.0; dim];
    for _ in 0..config.epochs {
        for doc in &p.docs {
            for (i, &center) in doc.iter().enumerate() {
                for q in context_range(i, doc.len(), config.window) {
                    let lr = decayed_learning_rate(
                        config.learning_rate,
                        config.min_learning_rate,
                        step,
                        total,
                    );
                    let input = &mut syn0[center * dim..(center + 1) * dim];
                    ns_step(input, &mut syn1, dim, neg.fill(doc[q]), lr, &mut delta);
                    input.iter_mut().zip(&delta).for_each(|(x, d)| *x += d);
                    step += 1;
                }
            }
        }
    }
    let keys = (0..vocab.len()).filter(|&t| p.counts[t] >= config.min_count);
    let mut table = EmbeddingTable::new(EmbeddingKind::Word, dim);
    for t in keys {
        table.insert(
            vocab.token(t as TokenId).to_owned(),
            syn0[t * dim..(t + 1) * dim].to_vec(),
        )?;
    }
    Ok(table)
}

fn doc_table(doc_ids: &[String], dim: usize, vecs: &[f64]) -> Result<EmbeddingTable> {
    let keys = doc_ids
        .iter()
        .map(|id| EmbeddingTable::doc_key(id))
        .collect();
    EmbeddingTable::from_rows(EmbeddingKind::Document, dim, keys, vecs.to_vec())
}

/// Distributed bag of words: each document vector predicts every token of its
/// document.
pub fn train_pvdbow(
    corpus: &[Vec<TokenId>],
    doc_ids: &[String],
    vocab_size: usize,
    config: &EmbeddingTrainConfig,
    seed: u64,
) -> Result<EmbeddingTable> {
    if doc_ids.len() != corpus.len() {
        return Err(Error::dims("train_pvdbow", "one id per document required"));
    }
    let p = prepare(corpus, vocab_size, config)?;
    let dim = config.dimension;
    let root = RandomSource::new(seed);
    let mut docvecs = init_table(corpus.len(), dim, &mut root.substream("init"));
    let mut syn1 = vec![0.0; vocab_size * dim];
    let mut neg = negatives(&p, config, &root)?;

    let total = p.docs.iter().map(|d| d.len() as u64).sum::<u64>() * config.epochs as u64;
    let mut step = 0u64;
    let mut delta = vec![0.0; dim];
    for _ in 0..config.epochs {
        for (d, doc) in p.docs.iter().enumerate() {
            for &tok in doc {
                let lr = decayed_learning_rate(
                    config.learning_rate,
                    config.min_learning_rate,
                    step,
                    total,
                );
                let input = &mut docvecs[d * dim..(d + 1) * dim];
                ns_step(input, &mut syn1, dim, neg.fill(tok), lr, &mut delta);
                input.iter_mut().zip(&delta).for_each(|(x, dl)| *x += dl);
                step += 1;
            }
        }
    }
    doc_table(doc_ids, dim, &docvecs)
}

/// Distributed memory: the mean of the document vector and the surrounding
/// context word vectors predicts the centre word. The gradient of the mean is
/// split evenly over its inputs.
pub fn train_pvdm(
    corpus: &[Vec<TokenId>],
    doc_ids: &[String],
    vocab_size: usize,
    config: &EmbeddingTrainConfig,
    seed: u64,
) -> Result<EmbeddingTable> {
    if doc_ids.len() != corpus.len() {
        return Err(Error::dims("train_pvdm", "one id per document required"));
    }
    let p = prepare(corpus, vocab_size, config)?;
    let dim = config.dimension;
    let root = RandomSource::new(seed);
    let mut docvecs = init_table(corpus.len(), dim, &mut root.substream("init"));
    let mut wordvecs = init_table(vocab_size, dim, &mut root.substream("init-words"));
    let mut syn1 = vec![0.0; vocab_size * dim];
    let mut neg = negatives(&p, config, &root)?;

    let total = p.docs.iter().map(|d| d.len() as u64).sum::<u64>() * config.epochs as u64;
    let mut step = 0u64;
    let mut hidden = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    for _ in 0..config.epochs {
        for (d, doc) in p.docs.iter().enumerate() {
            for (i, &center) in doc.iter().enumerate() {
                let lr = decayed_learning_rate(
                    config.learning_rate,
                    config.min_learning_rate,
                    step,
                    total,
                );
                hidden.copy_from_slice(&docvecs[d * dim..(d + 1) * dim]);
                let mut inputs = 1usize;
                for q in context_range(i, doc.len(), config.window) {
                    let w = doc[q];
                    hidden
                        .iter_mut()
                        .zip(&wordvecs[w * dim..(w + 1) * dim])
                        .for_each(|(h, x)| *h += x);
                    inputs += 1;
                }
                let scale = 1.0 / inputs as f64;
                hidden.iter_mut().for_each(|h| *h *= scale);
                ns_step(&hidden, &mut syn1, dim, neg.fill(center), lr, &mut delta);
                delta.iter_mut().for_each(|g| *g *= scale);
                docvecs[d * dim..(d + 1) * dim]
                    .iter_mut()
                    .zip(&delta)
                    .for_each(|(x, g)| *x += g);
                for q in context_range(i, doc.len(), config.window) {
                    let w = doc[q];
                    wordvecs[w * dim..(w + 1) * dim]
                        .iter_mut()
                        .zip(&delta)
                        .for_each(|(x, g)| *x += g);
                }
                step += 1;
            }
        }
    }
    doc_table(doc_ids, dim, &docvecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learning_rate_schedule_is_linear() {
        assert_eq!(decayed_learning_rate(0.025, 1e-4, 0, 100), 0.025);
        assert!((decayed_learning_rate(0.025, 1e-4, 50, 100) - (0.025 + 1e-4) / 2.0).abs() < 1e-15);
        assert!((decayed_learning_rate(0.025, 1e-4, 100, 100) - 1e-4).abs() < 1e-15);
        let a = decayed_learning_rate(0.05, 1e-4, 10, 1000);
        let b = decayed_learning_rate(0.05, 1e-4, 20, 1000);
        let c = decayed_learning_rate(0.05, 1e-4, 30, 1000);
        assert!(((a - b) - (b - c)).abs() < 1e-15);
    }

    #[test]
    fn sgd_step_follows_the_gradient() {
        let input = [0.3, -0.2, 0.5];
        let outs = [[0.1, 0.4, -0.3], [-0.5, 0.2, 0.2]];
        let mut table: Vec<f64> = outs.concat();
        let targets = [(0, true), (1, false)];
        let lr = 0.1;
        let (g_in, g_out) = ns_gradients(&input, &[&outs[0], &outs[1]], &[true, false]);
        let mut delta = vec![0.0; 3];
        ns_step(&input, &mut table, 3, &targets, lr, &mut delta);
        for k in 0..3 {
            assert!((delta[k] + lr * g_in[k]).abs() < 1e-15);
            assert!((table[k] - (outs[0][k] - lr * g_out[0][k])).abs() < 1e-15);
            assert!((table[3 + k] - (outs[1][k] - lr * g_out[1][k])).abs() < 1e-15);
        }
    }

    #[test]
    fn tiny_vocabulary_is_rejected() {
        let vocab = crate::corpus::build_vocabulary(&[vec!["a", "a"]]).unwrap();
        assert!(
            train_skipgram(&[vec![0, 0]], &vocab, &EmbeddingTrainConfig::default(), 0).is_err()
        );
        let bad = EmbeddingTrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(train_pvdbow(&[vec![0, 1]], &["d".into()], 2, &bad, 0).is_err());
    }
}
