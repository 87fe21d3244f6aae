//! Checkpoint layout: one JSON header line, then each parameter matrix as
//! raw little-endian `f64` values in header order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub model: String,
    pub seed: u64,
    pub epoch: usize,
    pub config: serde_json::Value,
    pub tensors: Vec<TensorEntry>,
}

pub fn write_checkpoint<W: Write>(
    mut w: W,
    header: &CheckpointHeader,
    tensors: &[&DenseMatrix],
) -> Result<()> {
    if header.tensors.len() != tensors.len() {
        return Err(Error::dims(
            "checkpoint",
            format!(
                "header lists {} tensors, got {}",
                header.tensors.len(),
                tensors.len()
            ),
        ));
    }
    for (entry, t) in header.tensors.iter().zip(tensors) {
        if (entry.rows, entry.cols) != t.shape() {
            return Err(Error::dims(
                "checkpoint",
                format!(
                    "{}: header {}x{}, tensor {:?}",
                    entry.name,
                    entry.rows,
                    entry.cols,
                    t.shape()
                ),
            ));
        }
    }
    let io = |e| Error::io(Path::new("<checkpoint>"), e);
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n").map_err(io)?;
    for t in tensors {
        for v in t.as_slice() {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn save_checkpoint(
    path: &Path,
    header: &CheckpointHeader,
    tensors: &[&DenseMatrix],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_checkpoint(BufWriter::new(file), header, tensors).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_checkpoint<R: BufRead>(
    mut r: R,
    origin: &Path,
) -> Result<(CheckpointHeader, Vec<DenseMatrix>)> {
    let mut line = String::new();
    r.read_line(&mut line).map_err(|e| Error::io(origin, e))?;
    let header: CheckpointHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::parse(origin, 1, format!("bad checkpoint header: {e}")))?;
    let mut tensors = Vec::with_capacity(header.tensors.len());
    for entry in &header.tensors {
        let mut bytes = vec![0u8; entry.rows * entry.cols * 8];
        r.read_exact(&mut bytes).map_err(|e| {
            Error::invalid(format!(
                "{}: truncated tensor {}: {e}",
                origin.display(),
                entry.name
            ))
        })?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        tensors.push(DenseMatrix::from_vec(entry.rows, entry.cols, data)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io(origin, e))? != 0 {
        return Err(Error::invalid(format!(
            "{}: trailing bytes after last tensor",
            origin.display()
        )));
    }
    Ok((header, tensors))
}

pub fn load_checkpoint(path: &Path) -> Result<(CheckpointHeader, Vec<DenseMatrix>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(BufReader::new(file), path)
}
