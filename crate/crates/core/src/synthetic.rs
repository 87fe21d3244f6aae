//! Generated topic corpora with known labels, for tests and benchmarks.
//!
//! Each class owns a disjoint block of topic words. A document draws its
//! tokens from its class block, except that each token is replaced by a word
//! from a shared pool with probability `shared_fraction`.

use rand::Rng;

use crate::corpus::{build_vocabulary, ProcessedCorpus};
use crate::error::{Error, Result};
use crate::numerics::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct TopicCorpusSpec {
    pub n_docs: usize,
    pub n_classes: usize,
    pub topic_words: usize,
    pub shared_words: usize,
    pub doc_len: usize,
    pub shared_fraction: f64,
    pub seed: u64,
}

impl TopicCorpusSpec {
    pub fn new(n_docs: usize, n_classes: usize) -> Self {
        Self {
            n_docs,
            n_classes,
            topic_words: 40,
            shared_words: 20,
            doc_len: 20,
            shared_fraction: 0.2,
            seed: 0,
        }
    }
}

/// Lower-case alphabetic name for `k`: a, b, ..., z, ba, bb, ...
fn letters(mut k: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (k % 26) as u8);
        k /= 26;
        if k == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

pub fn topic_word(class: usize, k: usize) -> String {
    format!("topic{}x{}", letters(class), letters(k))
}

pub fn shared_word(k: usize) -> String {
    format!("common{}", letters(k))
}

/// Builds the corpus. Document `i` has class `i % n_classes`.
pub fn topic_corpus(spec: &TopicCorpusSpec) -> Result<ProcessedCorpus> {
    if spec.n_classes < 2
        || spec.n_docs < spec.n_classes
        || spec.topic_words == 0
        || spec.doc_len == 0
    {
        return Err(Error::invalid(format!(
            "degenerate synthetic corpus spec {spec:?}"
        )));
    }
    if !(0.0..1.0).contains(&spec.shared_fraction)
        || (spec.shared_fraction > 0.0 && spec.shared_words == 0)
    {
        return Err(Error::invalid(
            "shared_fraction must be in [0, 1) and needs a non-empty shared pool",
        ));
    }
    let mut rng = RandomSource::new(spec.seed).substream("synthetic");
    let mut texts = Vec::with_capacity(spec.n_docs);
    let mut labels = Vec::with_capacity(spec.n_docs);
    for i in 0..spec.n_docs {
        let class = i % spec.n_classes;
        let doc: Vec<String> = (0..spec.doc_len)
            .map(|_| {
                if spec.shared_fraction > 0.0 && rng.random::<f64>() < spec.shared_fraction {
                    shared_word(rng.random_range(0..spec.shared_words))
                } else {
                    topic_word(class, rng.random_range(0..spec.topic_words))
                }
            })
            .collect();
        texts.push(doc);
        labels.push(class);
    }
    let vocabulary = build_vocabulary(&texts)?;
    let documents = texts.iter().map(|d| vocabulary.encode(d)).collect();
    let corpus = ProcessedCorpus {
        doc_ids: (0..spec.n_docs).map(|i| format!("d{i}")).collect(),
        documents,
        labels,
        class_names: (0..spec.n_classes)
            .map(|c| format!("class{}", letters(c)))
            .collect(),
        vocabulary,
    };
    corpus.validate()?;
    Ok(corpus)
}
