use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub type TokenId = u32;

/// Bijective token/id map with corpus and document frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    frequency: Vec<u64>,
    doc_frequency: Vec<u64>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn frequency(&self, id: TokenId) -> u64 {
        self.frequency[id as usize]
    }

    pub fn doc_frequency(&self, id: TokenId) -> u64 {
        self.doc_frequency[id as usize]
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequency
    }

    pub fn doc_frequencies(&self) -> &[u64] {
        &self.doc_frequency
    }

    /// Maps tokens to ids; unknown tokens are skipped.
    pub fn encode<S: AsRef<str>>(&self, doc: &[S]) -> Vec<TokenId> {
        doc.iter().filter_map(|t| self.id(t.as_ref())).collect()
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, tok) in self.tokens.iter().enumerate() {
            writeln!(
                w,
                "{tok}\t{id}\t{}\t{}",
                self.frequency[id], self.doc_frequency[id]
            )?;
        }
        w.flush()
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(std::io::BufWriter::new(f))
            .map_err(|e| Error::io(path, e))
    }

    pub fn parse_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        for (n, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |msg: &str| Error::parse(origin, n + 1, msg);
            let [tok, id, freq, df] = fields[..] else {
                return Err(bad(
                    "expected `token<TAB>id<TAB>frequency<TAB>doc_frequency`",
                ));
            };
            let id: usize = id.parse().map_err(|_| bad("bad id"))?;
            if id != vocab.tokens.len() {
                return Err(bad("ids must be dense and in order"));
            }
            if vocab.index.insert(tok.to_owned(), id as TokenId).is_some() {
                return Err(bad("duplicate token"));
            }
            vocab.tokens.push(tok.to_owned());
            vocab
                .frequency
                .push(freq.parse().map_err(|_| bad("bad frequency"))?);
            vocab
                .doc_frequency
                .push(df.parse().map_err(|_| bad("bad doc frequency"))?);
        }
        Ok(vocab)
    }

    pub fn load_tsv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text, path)
    }
}

/// Assigns ids in first-occurrence order and counts corpus and document
/// frequencies.
pub fn build_vocabulary<S: AsRef<str>>(corpus: &[Vec<S>]) -> Result<Vocabulary> {
    let mut vocab = Vocabulary::default();
    let mut last_doc: Vec<usize> = Vec::new();
    for (d, doc) in corpus.iter().enumerate() {
        for tok in doc {
            let tok = tok.as_ref();
            let id = match vocab.index.get(tok) {
                Some(&id) => id as usize,
                None => {
                    let id = vocab.tokens.len();
                    vocab.index.insert(tok.to_owned(), id as TokenId);
                    vocab.tokens.push(tok.to_owned());
                    vocab.frequency.push(0);
                    vocab.doc_frequency.push(0);
                    last_doc.push(usize::MAX);
                    id
                }
            };
            vocab.frequency[id] += 1;
            if last_doc[id] != d {
                last_doc[id] = d;
                vocab.doc_frequency[id] += 1;
            }
        }
    }
    if vocab.is_empty() {
        return Err(Error::invalid(
            "cannot build a vocabulary from an empty corpus",
        ));
    }
    Ok(vocab)
}
