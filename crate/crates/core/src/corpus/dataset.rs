use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stem::{stem_corpus, StemReport, Stemmer};
use super::text::{clean_text, is_valid_token, normalize_special_tokens, tokenize_and_filter};
use super::vocab::{build_vocabulary, TokenId, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub content: String,
    pub category: String,
}

/// Documents as token-id sequences with their class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedCorpus {
    pub doc_ids: Vec<String>,
    pub documents: Vec<Vec<TokenId>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub vocabulary: Vocabulary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PreprocessReport {
    pub input_documents: usize,
    pub dropped_blank: usize,
    pub dropped_empty_after_processing: usize,
    pub stem_failures: usize,
    pub discarded_long_tokens: usize,
}

impl ProcessedCorpus {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Checks every structural invariant of the corpus.
    pub fn validate(&self) -> Result<()> {
        let n = self.documents.len();
        if self.labels.len() != n || self.doc_ids.len() != n {
            return Err(Error::invalid("documents, labels and ids differ in length"));
        }
        if self.class_names.is_empty() {
            return Err(Error::invalid("corpus has no classes"));
        }
        let v = self.vocabulary.len() as TokenId;
        for (d, doc) in self.documents.iter().enumerate() {
            if doc.is_empty() {
                return Err(Error::invalid(format!(
                    "document {} is empty",
                    self.doc_ids[d]
                )));
            }
            if doc.iter().any(|&t| t >= v) {
                return Err(Error::invalid(format!(
                    "document {} has an out-of-vocabulary id",
                    self.doc_ids[d]
                )));
            }
        }
        if let Some(y) = self.labels.iter().find(|&&y| y >= self.class_names.len()) {
            return Err(Error::invalid(format!("label {y} out of range")));
        }
        Ok(())
    }

    /// Writes `doc_id<TAB>category<TAB>space-separated token ids`, one line
    /// per document, after a header line.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<corpus tsv>", e);
        writeln!(w, "doc_id\tcategory\ttokens").map_err(io)?;
        for ((id, doc), &y) in self.doc_ids.iter().zip(&self.documents).zip(&self.labels) {
            if id.contains(['\t', '\n', '\r']) {
                return Err(Error::invalid(format!(
                    "document id {id:?} contains a tab or newline"
                )));
            }
            let toks: Vec<String> = doc.iter().map(u32::to_string).collect();
            writeln!(w, "{id}\t{}\t{}", self.class_names[y], toks.join(" ")).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn save(&self, corpus_path: &Path, vocab_path: &Path) -> Result<()> {
        let f = std::fs::File::create(corpus_path).map_err(|e| Error::io(corpus_path, e))?;
        self.write_tsv(std::io::BufWriter::new(f))?;
        self.vocabulary.save_tsv(vocab_path)
    }

    pub fn load(corpus_path: &Path, vocab_path: &Path) -> Result<Self> {
        let vocabulary = Vocabulary::load_tsv(vocab_path)?;
        let f = std::fs::File::open(corpus_path).map_err(|e| Error::io(corpus_path, e))?;
        let mut doc_ids = Vec::new();
        let mut categories = Vec::new();
        let mut documents = Vec::new();
        for (n, line) in std::io::BufReader::new(f).lines().enumerate().skip(1) {
            let line = line.map_err(|e| Error::io(corpus_path, e))?;
            let mut parts = line.splitn(3, '\t');
            let (Some(id), Some(cat), Some(toks)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::parse(
                    corpus_path,
                    n + 1,
                    "expected `doc_id<TAB>category<TAB>tokens`",
                ));
            };
            let doc = toks
                .split_ascii_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<Vec<TokenId>, _>>()
                .map_err(|_| Error::parse(corpus_path, n + 1, "bad token id"))?;
            doc_ids.push(id.to_owned());
            categories.push(cat.to_owned());
            documents.push(doc);
        }
        let (class_names, labels) = index_categories(&categories);
        let corpus = ProcessedCorpus {
            doc_ids,
            documents,
            labels,
            class_names,
            vocabulary,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn token_strings(&self, d: usize) -> Vec<&str> {
        self.documents[d]
            .iter()
            .map(|&t| self.vocabulary.token(t))
            .collect()
    }
}

/// Class names in sorted order and the per-document class indices.
fn index_categories(categories: &[String]) -> (Vec<String>, Vec<usize>) {
    let names: Vec<String> = categories
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let labels = categories
        .iter()
        .map(|c| names.binary_search(c).unwrap())
        .collect();
    (names, labels)
}

/// Reads the raw dataset. Files ending in `.jsonl`/`.ndjson` are parsed as
/// JSON lines; anything else as CSV with an `id,content,category` header.
pub fn read_dataset(path: &Path) -> Result<Vec<RawDocument>> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(f);
    if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") {
        read_jsonl(reader, path)
    } else {
        read_csv(reader, path)
    }
}

pub fn read_csv<R: std::io::Read>(r: R, origin: &Path) -> Result<Vec<RawDocument>> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(r);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| Error::parse(origin, 1, format!("missing `{name}` column")))
    };
    let (id, content, category) = (col("id")?, col("content")?, col("category")?);
    let mut docs = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let row = n + 2;
        let rec = rec.map_err(|e| Error::parse(origin, row, e.to_string()))?;
        let field = |i: usize| {
            rec.get(i)
                .map(str::to_owned)
                .ok_or_else(|| Error::parse(origin, row, "short row"))
        };
        docs.push(RawDocument {
            id: field(id)?,
            content: field(content)?,
            category: field(category)?,
        });
    }
    Ok(docs)
}

pub fn read_jsonl<R: BufRead>(r: R, origin: &Path) -> Result<Vec<RawDocument>> {
    #[derive(Deserialize)]
    struct Row {
        id: serde_json::Value,
        content: String,
        category: String,
    }
    let mut docs = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row =
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, n + 1, e.to_string()))?;
        let id = match row.id {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        };
        docs.push(RawDocument {
            id,
            content: row.content,
            category: row.category,
        });
    }
    Ok(docs)
}

/// Runs the full cleaning pipeline: clean, tokenise and filter, stem tokens
/// that occur more than once, discard overlong tokens, re-check stems against
/// the token filter, and merge laughter/onomatopoeia tokens. Blank documents
/// and documents left without tokens are dropped.
pub fn preprocess(
    raw: &[RawDocument],
    stopwords: &HashSet<String>,
    stemmer: &dyn Stemmer,
) -> Result<(ProcessedCorpus, PreprocessReport)> {
    let mut report = PreprocessReport {
        input_documents: raw.len(),
        ..Default::default()
    };
    let kept: Vec<&RawDocument> = raw
        .iter()
        .filter(|d| !d.content.trim().is_empty())
        .collect();
    report.dropped_blank = raw.len() - kept.len();

    let tokens: Vec<Vec<String>> = kept
        .par_iter()
        .map(|d| tokenize_and_filter(&clean_text(&d.content), stopwords))
        .collect();
    let (
        stemmed,
        StemReport {
            failures,
            discarded_long,
            ..
        },
    ) = stem_corpus(tokens, stemmer);
    report.stem_failures = failures;
    report.discarded_long_tokens = discarded_long;
    let final_tokens: Vec<Vec<String>> = stemmed
        .into_par_iter()
        .map(|doc| {
            normalize_special_tokens(
                doc.into_iter()
                    .filter(|t| is_valid_token(t, stopwords))
                    .collect(),
            )
        })
        .collect();

    let mut doc_ids = Vec::new();
    let mut categories = Vec::new();
    let mut docs = Vec::new();
    for (d, toks) in kept.iter().zip(final_tokens) {
        if toks.is_empty() {
            report.dropped_empty_after_processing += 1;
            continue;
        }
        doc_ids.push(d.id.clone());
        categories.push(d.category.clone());
        docs.push(toks);
    }
    let vocabulary = build_vocabulary(&docs)?;
    let documents = docs.iter().map(|d| vocabulary.encode(d)).collect();
    let (class_names, labels) = index_categories(&categories);
    let corpus = ProcessedCorpus {
        doc_ids,
        documents,
        labels,
        class_names,
        vocabulary,
    };
    corpus.validate()?;
    Ok((corpus, report))
}
