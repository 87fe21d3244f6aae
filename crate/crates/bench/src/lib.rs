//! Shared fixtures for the kernel benchmarks.

use textgraph::corpus::ProcessedCorpus;
use textgraph::eval::build_graph;
use textgraph::features::tfidf;
use textgraph::graph::{HeteroGraph, NodeFeatures};
use textgraph::model::GcnParams;
use textgraph::synthetic::{topic_corpus, TopicCorpusSpec};
use textgraph::{DenseMatrix, RandomSource};

/// Four-topic synthetic corpus with `n_docs` documents.
pub fn corpus(n_docs: usize) -> ProcessedCorpus {
    topic_corpus(&TopicCorpusSpec {
        topic_words: 200,
        shared_words: 100,
        ..TopicCorpusSpec::new(n_docs, 4)
    })
    .expect("valid synthetic spec")
}

/// Normalised graph over [`corpus`] with the given PPMI window.
pub fn graph(n_docs: usize, window: usize) -> (ProcessedCorpus, HeteroGraph) {
    let c = corpus(n_docs);
    let g = build_graph(
        &c,
        &tfidf(&c.documents, &c.vocabulary).expect("tf-idf"),
        Some(window),
    )
    .expect("graph");
    (c, g)
}

/// Everything one GCN step needs: one-hot features, parameters, labels and
/// a training mask over a fifth of the documents.
pub struct GcnFixture {
    pub graph: HeteroGraph,
    pub features: NodeFeatures,
    pub params: GcnParams,
    pub labels: Vec<usize>,
    pub mask: Vec<bool>,
}

pub fn gcn_fixture(n_docs: usize, hidden: usize) -> GcnFixture {
    let (c, graph) = graph(n_docs, 20);
    let n = graph.n_nodes();
    let features = NodeFeatures::OneHot { n_nodes: n };
    let params = GcnParams::init(n, hidden, c.n_classes(), &mut RandomSource::new(0));
    let labels = (0..n)
        .map(|i| if i < c.len() { c.labels[i] } else { 0 })
        .collect();
    let mask = (0..n).map(|i| i < c.len() && i % 5 == 0).collect();
    GcnFixture {
        graph,
        features,
        params,
        labels,
        mask,
    }
}

/// Dense right-hand side for sparse products.
pub fn dense(rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |i, j| {
        ((i * 31 + j * 17) % 97) as f64 / 97.0 - 0.5
    })
}
