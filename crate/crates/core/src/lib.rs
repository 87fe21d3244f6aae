//! Semi-supervised text classification over a heterogeneous document-word
//! graph: corpus preprocessing, TF-IDF/PPMI graph construction, a two-layer
//! GCN with hand-written backpropagation, embedding and bag-of-words
//! baselines, and seeded evaluation sweeps.

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod model;
pub mod numerics;
pub mod synthetic;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, RandomSource, SparseMatrix};
