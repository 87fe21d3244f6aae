use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAX_TOKEN_CHARS: usize = 30;

/// Maps a token to its stem. Returning `None` signals a failure for that
/// token; callers keep the original token in that case.
pub trait Stemmer: Send + Sync {
    fn stem(&self, token: &str) -> Option<String>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityStemmer;

impl Stemmer for IdentityStemmer {
    fn stem(&self, token: &str) -> Option<String> {
        Some(token.to_owned())
    }
}

/// Lookup-table stemmer loaded from `token<TAB>stem` lines. Tokens missing
/// from the table are returned unchanged.
#[derive(Debug, Clone, Default)]
pub struct TableStemmer {
    table: HashMap<String, String>,
}

impl TableStemmer {
    pub fn new(table: HashMap<String, String>) -> Self {
        Self { table }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut table = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (token, stem) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, n + 1, "expected `token<TAB>stem`"))?;
            table.insert(token.to_owned(), stem.trim_end_matches('\r').to_owned());
        }
        Ok(Self { table })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Stemmer for TableStemmer {
    fn stem(&self, token: &str) -> Option<String> {
        match self.table.get(token) {
            Some(s) if s.is_empty() => None,
            Some(s) => Some(s.clone()),
            None => Some(token.to_owned()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StemReport {
    pub stemmed: usize,
    pub failures: usize,
    pub discarded_long: usize,
}

/// Stems every token whose corpus frequency exceeds one, then drops tokens
/// longer than [`MAX_TOKEN_CHARS`] characters.
pub fn stem_corpus(
    corpus: Vec<Vec<String>>,
    stemmer: &dyn Stemmer,
) -> (Vec<Vec<String>>, StemReport) {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for tok in corpus.iter().flatten() {
        *freq.entry(tok.as_str()).or_default() += 1;
    }
    // Stem each distinct frequent token once.
    let mut report = StemReport::default();
    let mut stems: HashMap<String, String> = HashMap::new();
    let mut frequent: Vec<&str> = freq
        .iter()
        .filter(|(_, &c)| c > 1)
        .map(|(t, _)| *t)
        .collect();
    frequent.sort_unstable();
    for tok in frequent {
        match stemmer.stem(tok) {
            Some(s) if !s.is_empty() => {
                stems.insert(tok.to_owned(), s);
            }
            _ => report.failures += 1,
        }
    }
    let out = corpus
        .iter()
        .map(|doc| {
            doc.iter()
                .filter_map(|tok| {
                    let t = match stems.get(tok) {
                        Some(s) => {
                            report.stemmed += 1;
                            s.clone()
                        }
                        None => tok.clone(),
                    };
                    if t.chars().count() > MAX_TOKEN_CHARS {
                        report.discarded_long += 1;
                        None
                    } else {
                        Some(t)
                    }
                })
                .collect()
        })
        .collect();
    (out, report)
}
