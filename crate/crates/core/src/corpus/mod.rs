//! Dataset ingestion, text cleaning, vocabulary and train/validation/test
//! splitting.

mod dataset;
mod split;
mod stem;
mod text;
mod vocab;

pub use dataset::{
    preprocess, read_csv, read_dataset, read_jsonl, PreprocessReport, ProcessedCorpus, RawDocument,
};
pub use split::{select_labelled_subset, split_labels, Split, SplitAssignment};
pub use stem::{stem_corpus, IdentityStemmer, StemReport, Stemmer, TableStemmer, MAX_TOKEN_CHARS};
pub use text::{
    clean_text, default_stopwords, is_valid_token, normalize_special_tokens, parse_stopwords,
    tokenize_and_filter, LAUGHTER, ONOMATOPOEIA,
};
pub use vocab::{build_vocabulary, TokenId, Vocabulary};

use crate::error::Result;

/// Stratified 8:1:1-style split of a processed corpus.
pub fn split_corpus(
    corpus: &ProcessedCorpus,
    ratios: (u32, u32, u32),
    seed: u64,
) -> Result<SplitAssignment> {
    split_labels(&corpus.labels, corpus.n_classes(), ratios, seed)
}
