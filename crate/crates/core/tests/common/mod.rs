//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use textgraph::corpus::{build_vocabulary, TokenId, Vocabulary};
use textgraph::graph::{HeteroGraph, NodeFeatures};
use textgraph::model::{gcn_forward, masked_cross_entropy, GcnParams};
use textgraph::{DenseMatrix, RandomSource};

pub struct SmallCorpus {
    pub docs: Vec<Vec<TokenId>>,
    pub vocab: Vocabulary,
}

/// Random corpus with every document non-empty. Tokens are drawn from
/// `max_vocab` names, so the realised vocabulary may be smaller.
pub fn random_corpus(
    rng: &mut RandomSource,
    max_docs: usize,
    max_len: usize,
    max_vocab: usize,
) -> SmallCorpus {
    let n_docs = rng.random_range(1..=max_docs);
    let vocab_names = rng.random_range(1..=max_vocab);
    let texts: Vec<Vec<String>> = (0..n_docs)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            (0..len)
                .map(|_| format!("w{}", rng.random_range(0..vocab_names)))
                .collect()
        })
        .collect();
    let vocab = build_vocabulary(&texts).expect("non-empty corpus");
    let docs = texts.iter().map(|d| vocab.encode(d)).collect();
    SmallCorpus { docs, vocab }
}

/// Window counts by explicit enumeration of every window.
pub struct WindowOracle {
    pub total: u64,
    pub single: Vec<u64>,
    pub pairs: BTreeMap<(TokenId, TokenId), u64>,
}

pub fn enumerate_windows(docs: &[Vec<TokenId>], vocab_size: usize, window: usize) -> WindowOracle {
    let mut out = WindowOracle {
        total: 0,
        single: vec![0; vocab_size],
        pairs: BTreeMap::new(),
    };
    for doc in docs {
        let spans: Vec<&[TokenId]> = if doc.len() <= window {
            vec![&doc[..]]
        } else {
            (0..=doc.len() - window)
                .map(|s| &doc[s..s + window])
                .collect()
        };
        for span in spans {
            out.total += 1;
            let distinct: BTreeSet<TokenId> = span.iter().copied().collect();
            for &a in &distinct {
                out.single[a as usize] += 1;
                for &b in distinct.range(a + 1..) {
                    *out.pairs.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
    }
    out
}

pub fn dense_ppmi(o: &WindowOracle) -> DenseMatrix {
    let v = o.single.len();
    let mut m = DenseMatrix::zeros(v, v);
    for (&(a, b), &joint) in &o.pairs {
        let pmi = (joint as f64 * o.total as f64
            / (o.single[a as usize] as f64 * o.single[b as usize] as f64))
            .ln();
        if pmi > 0.0 {
            m.set(a as usize, b as usize, pmi);
            m.set(b as usize, a as usize, pmi);
        }
    }
    m
}

/// Unnormalised adjacency from scratch: unit diagonal, TF-IDF between
/// documents and words, PPMI between distinct words.
pub fn dense_adjacency(
    docs: &[Vec<TokenId>],
    vocab_size: usize,
    window: Option<usize>,
) -> DenseMatrix {
    let d = docs.len();
    let n = d + vocab_size;
    let mut a = DenseMatrix::identity(n);
    let mut df = vec![0usize; vocab_size];
    for doc in docs {
        for t in doc.iter().collect::<BTreeSet<_>>() {
            df[*t as usize] += 1;
        }
    }
    for (i, doc) in docs.iter().enumerate() {
        for (w, &df_w) in df.iter().enumerate() {
            let tf = doc.iter().filter(|&&t| t as usize == w).count();
            if tf > 0 {
                let weight = tf as f64 * (d as f64 / df_w as f64).ln();
                a.set(i, d + w, weight);
                a.set(d + w, i, weight);
            }
        }
    }
    if let Some(window) = window {
        let ppmi = dense_ppmi(&enumerate_windows(docs, vocab_size, window));
        for i in 0..vocab_size {
            for j in 0..vocab_size {
                if i != j {
                    a.set(d + i, d + j, ppmi.get(i, j));
                }
            }
        }
    }
    a
}

pub fn dense_normalize(a: &DenseMatrix) -> DenseMatrix {
    let deg: Vec<f64> = (0..a.rows()).map(|i| a.row(i).iter().sum()).collect();
    DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        a.get(i, j) / (deg[i] * deg[j]).sqrt()
    })
}

fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
    })
}

/// Forward pass without dropout, by plain loops.
pub fn dense_gcn_forward(
    a_hat: &DenseMatrix,
    x: &DenseMatrix,
    params: &GcnParams,
) -> (DenseMatrix, DenseMatrix) {
    let pre = naive_matmul(&naive_matmul(a_hat, x), &params.theta0);
    let hidden = pre.map(|v| v.max(0.0));
    let logits = naive_matmul(&naive_matmul(a_hat, &hidden), &params.theta1);
    let probs = DenseMatrix::from_fn(logits.rows(), logits.cols(), |i, j| {
        let row = logits.row(i);
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = row.iter().map(|v| (v - m).exp()).sum();
        (row[j] - m).exp() / z
    });
    (pre, probs)
}

pub fn materialise(x: &NodeFeatures) -> DenseMatrix {
    match x {
        NodeFeatures::OneHot { n_nodes } => DenseMatrix::identity(*n_nodes),
        NodeFeatures::Dense(m) => m.clone(),
    }
}

/// Relative error with a floor so entries that are zero up to rounding do
/// not divide by zero.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

pub const FD_STEP: f64 = 1e-5;

pub fn gcn_loss(
    graph: &HeteroGraph,
    x: &NodeFeatures,
    params: &GcnParams,
    labels: &[usize],
    mask: &[bool],
) -> f64 {
    let mut rng = RandomSource::new(0);
    let cache = gcn_forward(graph, x, params, 0.0, &mut rng, false).unwrap();
    masked_cross_entropy(&cache.probs, labels, mask).unwrap()
}

/// Central difference of `f` in every entry of `m`.
pub fn numeric_gradient(m: &DenseMatrix, mut f: impl FnMut(&DenseMatrix) -> f64) -> DenseMatrix {
    let mut probe = m.clone();
    let mut out = DenseMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let orig = m.get(i, j);
            probe.set(i, j, orig + FD_STEP);
            let up = f(&probe);
            probe.set(i, j, orig - FD_STEP);
            let down = f(&probe);
            probe.set(i, j, orig);
            out.set(i, j, (up - down) / (2.0 * FD_STEP));
        }
    }
    out
}

pub fn max_relative_error(analytic: &DenseMatrix, numeric: &DenseMatrix) -> f64 {
    analytic
        .as_slice()
        .iter()
        .zip(numeric.as_slice())
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}
