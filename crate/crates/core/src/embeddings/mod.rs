//! Word and document embeddings: skip-gram, PV-DBOW and PV-DM trainers with
//! negative sampling, plus the text embedding format.

mod sampler;
mod table;
mod train;

pub use sampler::{NegativeSampler, UNIGRAM_POWER};
pub use table::{average_document_embedding, load_pretrained, EmbeddingKind, EmbeddingTable};
pub use train::{
    decayed_learning_rate, ns_gradients, ns_loss, train_pvdbow, train_pvdm, train_skipgram,
    EmbeddingTrainConfig,
};
