use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingKind {
    Word,
    Document,
}

/// Keyed table of equal-length vectors.
///
/// Document tables use `doc:<id>` keys so both kinds share one text format:
/// a `count dim` header followed by `key v1 ... vdim` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    kind: EmbeddingKind,
    dim: usize,
    keys: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(kind: EmbeddingKind, dim: usize) -> Self {
        Self {
            kind,
            dim,
            keys: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    pub fn doc_key(id: &str) -> String {
        format!("doc:{id}")
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.index.get(key).map(|&r| self.row(r))
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn insert(&mut self, key: String, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::dims(
                "EmbeddingTable::insert",
                format!("{} values for dimension {}", vector.len(), self.dim),
            ));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite embedding for `{key}`")));
        }
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::invalid(format!(
                "embedding key {key:?} must be non-empty without whitespace"
            )));
        }
        match self.index.get(&key) {
            Some(&r) => self.data[r * self.dim..(r + 1) * self.dim].copy_from_slice(&vector),
            None => {
                self.index.insert(key.clone(), self.keys.len());
                self.keys.push(key);
                self.data.extend_from_slice(&vector);
            }
        }
        Ok(())
    }

    pub(crate) fn from_rows(
        kind: EmbeddingKind,
        dim: usize,
        keys: Vec<String>,
        data: Vec<f64>,
    ) -> Result<Self> {
        let mut table = Self::new(kind, dim);
        for (k, row) in keys.into_iter().zip(data.chunks(dim.max(1))) {
            table.insert(k, row.to_vec())?;
        }
        Ok(table)
    }

    /// Writes the text format. Values use the shortest representation that
    /// parses back to the same `f64`.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (r, key) in self.keys.iter().enumerate() {
            write!(w, "{key}")?;
            for v in self.row(r) {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(f))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read<R: BufRead>(r: R, kind: EmbeddingKind, origin: &Path) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing `count dim` header"))?
            .map_err(|e| Error::io(origin, e))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(origin, 1, "header must be `count dim`"))?;
        let [count, dim] = nums[..] else {
            return Err(Error::parse(origin, 1, "header must be `count dim`"));
        };
        let mut table = Self::new(kind, dim);
        for (n, line) in lines.enumerate() {
            let line_no = n + 2;
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap().to_owned();
            let values: Vec<f64> = parts
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(origin, line_no, "malformed number"))?;
            if values.len() != dim {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("expected {dim} values, found {}", values.len()),
                ));
            }
            table
                .insert(key, values)
                .map_err(|e| Error::parse(origin, line_no, e.to_string()))?;
        }
        if table.len() != count {
            return Err(Error::parse(
                origin,
                1,
                format!("header declares {count} vectors, found {}", table.len()),
            ));
        }
        Ok(table)
    }

    pub fn load(path: &Path, kind: EmbeddingKind) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(f), kind, path)
    }
}

/// Loads a pretrained word-embedding file in the `count dim` text format.
pub fn load_pretrained(path: &Path) -> Result<EmbeddingTable> {
    EmbeddingTable::load(path, EmbeddingKind::Word)
}

/// Mean of the vectors of in-table tokens; the zero vector when none are present.
pub fn average_document_embedding<S: AsRef<str>>(doc: &[S], table: &EmbeddingTable) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim()];
    let mut n = 0usize;
    for v in doc.iter().filter_map(|t| table.get(t.as_ref())) {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        n += 1;
    }
    if n > 0 {
        sum.iter_mut().for_each(|s| *s /= n as f64);
    }
    sum
}
