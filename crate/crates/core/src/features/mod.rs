//! Sliding-window co-occurrence statistics, PPMI, TF-IDF and term counts.

mod bow;
mod cooccur;

pub use bow::{term_counts, tfidf, TfidfMatrix};
pub use cooccur::{count_windows, pmi, ppmi_matrix, CooccurrenceStats};
