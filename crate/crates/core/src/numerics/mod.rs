//! Dense and sparse matrix containers and the kernels built on them.

mod dense;
mod random;
mod sparse;

pub use dense::{softmax_rows, DenseMatrix};
pub use random::{dropout, dropout_mask, glorot_init, RandomSource};
pub use sparse::{spmm, SparseMatrix};
