//! Heterogeneous document-word graph.
//!
//! Nodes `0..n_docs` are documents and `n_docs..n_docs + n_words` are words.
//! Document-word edges carry TF-IDF weights, word-word edges carry PPMI, every
//! node has a unit self loop, and there are no document-document edges.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, SparseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct HeteroGraph {
    n_docs: usize,
    n_words: usize,
    adjacency: SparseMatrix,
    normalized: bool,
}

impl HeteroGraph {
    /// Wraps an existing adjacency, checking shape and symmetry.
    pub fn new(
        n_docs: usize,
        n_words: usize,
        adjacency: SparseMatrix,
        normalized: bool,
    ) -> Result<Self> {
        let n = n_docs + n_words;
        if adjacency.shape() != (n, n) {
            return Err(Error::dims(
                "HeteroGraph::new",
                format!("adjacency {:?} for {n} nodes", adjacency.shape()),
            ));
        }
        if !adjacency.is_symmetric() {
            return Err(Error::invalid("adjacency must be symmetric"));
        }
        Ok(Self {
            n_docs,
            n_words,
            adjacency,
            normalized,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn n_nodes(&self) -> usize {
        self.n_docs + self.n_words
    }

    pub fn adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn word_node(&self, word: usize) -> usize {
        self.n_docs + word
    }

    /// Number of stored off-diagonal word-word entries.
    pub fn word_word_edges(&self) -> usize {
        self.adjacency
            .triplets()
            .filter(|&(i, j, _)| i != j && i >= self.n_docs && j >= self.n_docs)
            .count()
    }

    /// Writes `<stem>.coo` and the `<stem>.json` sidecar.
    pub fn save(
        &self,
        coo_path: &Path,
        sidecar_path: &Path,
        window_size: Option<usize>,
    ) -> Result<()> {
        self.adjacency.save_coo(coo_path)?;
        let meta = GraphSidecar {
            n_docs: self.n_docs,
            n_words: self.n_words,
            normalized: self.normalized,
            window_size,
            node_order: NODE_ORDER.to_owned(),
        };
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        std::fs::write(sidecar_path, text).map_err(|e| Error::io(sidecar_path, e))
    }

    pub fn load(coo_path: &Path, sidecar_path: &Path) -> Result<(Self, GraphSidecar)> {
        let text = std::fs::read_to_string(sidecar_path).map_err(|e| Error::io(sidecar_path, e))?;
        let meta: GraphSidecar = serde_json::from_str(&text)?;
        if meta.node_order != NODE_ORDER {
            return Err(Error::invalid(format!(
                "unsupported node order `{}`",
                meta.node_order
            )));
        }
        let adjacency = SparseMatrix::load_coo(coo_path)?;
        let graph = HeteroGraph::new(meta.n_docs, meta.n_words, adjacency, meta.normalized)?;
        Ok((graph, meta))
    }
}

pub const NODE_ORDER: &str = "docs_then_words";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSidecar {
    pub n_docs: usize,
    pub n_words: usize,
    pub normalized: bool,
    pub window_size: Option<usize>,
    pub node_order: String,
}

/// Assembles the unnormalised adjacency from a `docs × words` TF-IDF matrix
/// and a symmetric `words × words` PPMI matrix (pass an empty matrix to omit
/// word-word edges). PPMI diagonal entries, if any, are ignored.
pub fn build_adjacency(tfidf: &SparseMatrix, ppmi: &SparseMatrix) -> Result<HeteroGraph> {
    let (n_docs, n_words) = tfidf.shape();
    if ppmi.shape() != (n_words, n_words) {
        return Err(Error::dims(
            "build_adjacency",
            format!(
                "tfidf is {n_docs}x{n_words} but ppmi is {}x{}",
                ppmi.rows(),
                ppmi.cols()
            ),
        ));
    }
    let n = n_docs + n_words;
    let mut triplets = Vec::with_capacity(n + 2 * tfidf.nnz() + ppmi.nnz());
    for k in 0..n {
        triplets.push((k, k, 1.0));
    }
    for (d, w, v) in tfidf.triplets() {
        if v < 0.0 {
            return Err(Error::invalid(format!(
                "negative TF-IDF weight at ({d},{w})"
            )));
        }
        triplets.push((d, n_docs + w, v));
        triplets.push((n_docs + w, d, v));
    }
    for (i, j, v) in ppmi.triplets() {
        if i != j && v > 0.0 {
            triplets.push((n_docs + i, n_docs + j, v));
        }
    }
    let adjacency = SparseMatrix::from_triplets(n, n, triplets)?;
    HeteroGraph::new(n_docs, n_words, adjacency, false)
}

/// Symmetric degree normalisation `D^-1/2 A D^-1/2` with `d_i = Σ_j A_ij`.
/// The self loops already present in `A` are used as-is; no extra identity
/// is added.
pub fn normalize_adjacency(graph: &HeteroGraph) -> Result<HeteroGraph> {
    if graph.normalized {
        return Err(Error::invalid("graph is already normalized"));
    }
    let degree = graph.adjacency.row_sums();
    if let Some(i) = degree.iter().position(|&d| d <= 0.0) {
        return Err(Error::invalid(format!(
            "node {i} has non-positive degree {}",
            degree[i]
        )));
    }
    let adjacency = graph
        .adjacency
        .map_entries(|i, j, v| v / (degree[i] * degree[j]).sqrt())?;
    Ok(HeteroGraph {
        adjacency,
        normalized: true,
        ..graph.clone()
    })
}

/// Node input features.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeFeatures {
    /// The `N × N` identity, never materialised.
    OneHot {
        n_nodes: usize,
    },
    Dense(DenseMatrix),
}

impl NodeFeatures {
    pub fn n_nodes(&self) -> usize {
        match self {
            NodeFeatures::OneHot { n_nodes } => *n_nodes,
            NodeFeatures::Dense(m) => m.rows(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NodeFeatures::OneHot { n_nodes } => *n_nodes,
            NodeFeatures::Dense(m) => m.cols(),
        }
    }

    /// Bytes held by the feature buffer (zero for one-hot).
    pub fn buffer_bytes(&self) -> usize {
        match self {
            NodeFeatures::OneHot { .. } => 0,
            NodeFeatures::Dense(m) => m.buffer_bytes(),
        }
    }
}

pub fn make_onehot_features(graph: &HeteroGraph) -> NodeFeatures {
    NodeFeatures::OneHot {
        n_nodes: graph.n_nodes(),
    }
}

/// Dense features: document rows from `doc_vectors` (keyed `doc:<id>`), word
/// rows from `word_vectors` (keyed by token), in node order.
pub fn make_t2v_features(
    graph: &HeteroGraph,
    vocabulary: &Vocabulary,
    doc_ids: &[String],
    word_vectors: &EmbeddingTable,
    doc_vectors: &EmbeddingTable,
) -> Result<NodeFeatures> {
    if doc_ids.len() != graph.n_docs() || vocabulary.len() != graph.n_words() {
        return Err(Error::dims(
            "make_t2v_features",
            format!(
                "graph has {} docs / {} words, got {} ids / {} tokens",
                graph.n_docs(),
                graph.n_words(),
                doc_ids.len(),
                vocabulary.len()
            ),
        ));
    }
    let dim = word_vectors.dim();
    if doc_vectors.dim() != dim {
        return Err(Error::dims(
            "make_t2v_features",
            format!("word dim {dim} vs doc dim {}", doc_vectors.dim()),
        ));
    }
    let mut out = DenseMatrix::zeros(graph.n_nodes(), dim);
    let mut missing = Vec::new();
    for (d, id) in doc_ids.iter().enumerate() {
        let key = EmbeddingTable::doc_key(id);
        match doc_vectors.get(&key) {
            Some(v) => out.row_mut(d).copy_from_slice(v),
            None => missing.push(key),
        }
    }
    for (w, tok) in vocabulary.tokens().iter().enumerate() {
        match word_vectors.get(tok) {
            Some(v) => out.row_mut(graph.word_node(w)).copy_from_slice(v),
            None => missing.push(tok.clone()),
        }
    }
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(20).map(String::as_str).collect();
        return Err(Error::invalid(format!(
            "{} node(s) lack an embedding: {}{}",
            missing.len(),
            shown.join(", "),
            if missing.len() > shown.len() {
                ", ..."
            } else {
                ""
            }
        )));
    }
    Ok(NodeFeatures::Dense(out))
}
