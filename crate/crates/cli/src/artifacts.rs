//! Work-directory layout and the content-hash cache.
//!
//! Every cached artifact has a sibling `.key` file holding the SHA-256 of the
//! inputs and settings that produced it. An artifact is reused only when its
//! key matches and all its files exist.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use textgraph::corpus::{ProcessedCorpus, SplitAssignment};
use textgraph::eval::EmbeddingRole;

pub struct Workdir {
    root: PathBuf,
}

impl Workdir {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating work directory {}", root.display()))?;
        Ok(Self {
            root: root.to_owned(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn corpus(&self) -> PathBuf {
        self.root.join("corpus.tsv")
    }

    pub fn vocab(&self) -> PathBuf {
        self.root.join("vocab.tsv")
    }

    pub fn split(&self) -> PathBuf {
        self.root.join("split.csv")
    }

    pub fn preprocess_report(&self) -> PathBuf {
        self.root.join("preprocess.json")
    }

    pub fn preprocess_key(&self) -> PathBuf {
        self.root.join("preprocess.key")
    }

    /// `(coo, sidecar, key)` for the graph built with `window`.
    pub fn graph(&self, window: Option<usize>) -> (PathBuf, PathBuf, PathBuf) {
        let stem = match window {
            Some(w) => format!("window{w}"),
            None => "no-ppmi".to_owned(),
        };
        let dir = self.root.join("graphs");
        (
            dir.join(format!("{stem}.coo")),
            dir.join(format!("{stem}.json")),
            dir.join(format!("{stem}.key")),
        )
    }

    /// `(table, key)` for one embedding role and seed.
    pub fn embedding(&self, role: EmbeddingRole, seed: u64) -> (PathBuf, PathBuf) {
        let dir = self.root.join("embeddings");
        (
            dir.join(format!("{role}-seed{seed}.txt")),
            dir.join(format!("{role}-seed{seed}.key")),
        )
    }

    pub fn run_dir(&self, name: &str) -> PathBuf {
        self.root.join("runs").join(name)
    }

    pub fn sweep_dir(&self, kind: &str) -> PathBuf {
        self.root.join("sweeps").join(kind)
    }

    pub fn scratch(&self) -> PathBuf {
        self.root.join("tmp")
    }

    /// Loads the preprocessing artifacts, checking they describe the same
    /// documents.
    pub fn load_corpus(&self) -> Result<(ProcessedCorpus, SplitAssignment)> {
        for path in [self.corpus(), self.vocab(), self.split()] {
            require(&path, "preprocess")?;
        }
        let corpus = ProcessedCorpus::load(&self.corpus(), &self.vocab())?;
        let (ids, split) = SplitAssignment::load_csv(&self.split())?;
        if ids != corpus.doc_ids {
            bail!(
                "{} does not match {}; rerun `textgraph preprocess`",
                self.split().display(),
                self.corpus().display()
            );
        }
        Ok((corpus, split))
    }

    /// Hash identifying the processed corpus for downstream keys.
    pub fn corpus_key(&self) -> Result<String> {
        Ok(hash_parts(&[&read(&self.corpus())?, &read(&self.vocab())?]))
    }
}

pub fn require(path: &Path, producer: &str) -> Result<()> {
    if !path.exists() {
        bail!(
            "missing artifact {}; run `textgraph {producer}` first",
            path.display()
        );
    }
    Ok(())
}

pub fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

/// SHA-256 over length-prefixed parts, as lowercase hex.
pub fn hash_parts(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// True when `key_file` holds `key` and every output exists.
pub fn is_fresh(key_file: &Path, key: &str, outputs: &[&Path]) -> bool {
    outputs.iter().all(|p| p.exists())
        && fs::read_to_string(key_file).is_ok_and(|k| k.trim() == key)
}

pub fn write_key(key_file: &Path, key: &str) -> Result<()> {
    fs::write(key_file, format!("{key}\n"))
        .with_context(|| format!("writing {}", key_file.display()))
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}
