use std::collections::BTreeMap;

use crate::corpus::{TokenId, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::SparseMatrix;

/// `|docs| × |vocab|` TF-IDF matrix (raw term frequency, unsmoothed natural-log IDF).
pub type TfidfMatrix = SparseMatrix;

fn counts(doc: &[TokenId]) -> BTreeMap<TokenId, u64> {
    let mut m = BTreeMap::new();
    for &t in doc {
        *m.entry(t).or_default() += 1;
    }
    m
}

fn check(corpus: &[Vec<TokenId>], vocab: &Vocabulary) -> Result<()> {
    let v = vocab.len() as TokenId;
    if let Some(&bad) = corpus.iter().flatten().find(|&&t| t >= v) {
        return Err(Error::invalid(format!(
            "token id {bad} outside vocabulary of {v}"
        )));
    }
    Ok(())
}

/// Raw term counts per document.
pub fn term_counts(corpus: &[Vec<TokenId>], vocab: &Vocabulary) -> Result<SparseMatrix> {
    check(corpus, vocab)?;
    let triplets = corpus
        .iter()
        .enumerate()
        .flat_map(|(d, doc)| {
            counts(doc)
                .into_iter()
                .map(move |(t, c)| (d, t as usize, c as f64))
        })
        .collect();
    SparseMatrix::from_triplets(corpus.len(), vocab.len(), triplets)
}

/// `tf(d,w) · ln(N / df(w))`; document frequencies come from `vocab`, which
/// must have been built from this corpus.
pub fn tfidf(corpus: &[Vec<TokenId>], vocab: &Vocabulary) -> Result<TfidfMatrix> {
    check(corpus, vocab)?;
    let n = corpus.len() as f64;
    let idf: Vec<f64> = vocab
        .doc_frequencies()
        .iter()
        .map(|&df| if df == 0 { 0.0 } else { (n / df as f64).ln() })
        .collect();
    let triplets = corpus
        .iter()
        .enumerate()
        .flat_map(|(d, doc)| {
            let idf = &idf;
            counts(doc)
                .into_iter()
                .map(move |(t, c)| (d, t as usize, c as f64 * idf[t as usize]))
        })
        .collect();
    SparseMatrix::from_triplets(corpus.len(), vocab.len(), triplets)
}
