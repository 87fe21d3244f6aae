use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::TokenId;
use crate::error::{Error, Result};
use crate::numerics::SparseMatrix;

/// Sliding-window occurrence counts.
///
/// `single_counts[i]` is the number of windows containing word `i` at least
/// once; `pair_counts` holds, for `i < j`, the number of windows containing
/// both. Entries with a zero count are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceStats {
    pub window_size: usize,
    pub total_windows: u64,
    pub single_counts: Vec<u64>,
    pub pair_counts: Vec<((TokenId, TokenId), u64)>,
}

type PairTable = HashMap<u64, u64>;

#[inline]
fn pair_key(i: TokenId, j: TokenId) -> u64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    (u64::from(a) << 32) | u64::from(b)
}

struct Partial {
    windows: u64,
    singles: HashMap<TokenId, u64>,
    pairs: PairTable,
}

impl Partial {
    fn new() -> Self {
        Self {
            windows: 0,
            singles: HashMap::new(),
            pairs: HashMap::new(),
        }
    }

    fn add_window(&mut self, window: &[TokenId], scratch: &mut Vec<TokenId>) {
        scratch.clear();
        scratch.extend_from_slice(window);
        scratch.sort_unstable();
        scratch.dedup();
        self.windows += 1;
        for (a, &i) in scratch.iter().enumerate() {
            *self.singles.entry(i).or_default() += 1;
            for &j in &scratch[a + 1..] {
                *self.pairs.entry(pair_key(i, j)).or_default() += 1;
            }
        }
    }

    fn merge(mut self, mut other: Partial) -> Partial {
        if other.pairs.len() > self.pairs.len() {
            std::mem::swap(&mut self, &mut other);
        }
        self.windows += other.windows;
        for (k, v) in other.singles {
            *self.singles.entry(k).or_default() += v;
        }
        for (k, v) in other.pairs {
            *self.pairs.entry(k).or_default() += v;
        }
        self
    }
}

/// Counts stride-1 windows within each document. A document no longer than
/// the window contributes exactly one window; windows never cross documents.
///
/// Documents are processed in parallel and merged by integer addition, so the
/// result is independent of the number of worker threads.
pub fn count_windows(
    corpus: &[Vec<TokenId>],
    vocab_size: usize,
    window_size: usize,
) -> Result<CooccurrenceStats> {
    if window_size < 1 {
        return Err(Error::invalid("window size must be at least 1"));
    }
    if corpus.is_empty() {
        return Err(Error::invalid("cannot count windows over an empty corpus"));
    }
    if let Some(&bad) = corpus.iter().flatten().find(|&&t| t as usize >= vocab_size) {
        return Err(Error::invalid(format!(
            "token id {bad} outside vocabulary of {vocab_size}"
        )));
    }
    let partial = corpus
        .par_iter()
        .fold(
            || (Partial::new(), Vec::new()),
            |(mut acc, mut scratch), doc| {
                if doc.len() <= window_size {
                    acc.add_window(doc, &mut scratch);
                } else {
                    for w in doc.windows(window_size) {
                        acc.add_window(w, &mut scratch);
                    }
                }
                (acc, scratch)
            },
        )
        .map(|(p, _)| p)
        .reduce(Partial::new, Partial::merge);

    let mut single_counts = vec![0u64; vocab_size];
    for (i, c) in partial.singles {
        single_counts[i as usize] = c;
    }
    let mut pair_counts: Vec<((TokenId, TokenId), u64)> = partial
        .pairs
        .into_iter()
        .map(|(k, c)| (((k >> 32) as TokenId, k as TokenId), c))
        .collect();
    pair_counts.sort_unstable_by_key(|&(k, _)| k);
    Ok(CooccurrenceStats {
        window_size,
        total_windows: partial.windows,
        single_counts,
        pair_counts,
    })
}

impl CooccurrenceStats {
    pub fn vocab_size(&self) -> usize {
        self.single_counts.len()
    }

    pub fn single(&self, i: TokenId) -> u64 {
        self.single_counts[i as usize]
    }

    pub fn pair(&self, i: TokenId, j: TokenId) -> u64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.pair_counts
            .binary_search_by_key(&key, |&(k, _)| k)
            .map_or(0, |p| self.pair_counts[p].1)
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "{} {} {}",
            self.window_size,
            self.total_windows,
            self.vocab_size()
        )?;
        for (i, &c) in self.single_counts.iter().enumerate() {
            if c > 0 {
                writeln!(w, "{i} {c}")?;
            }
        }
        for &((i, j), c) in &self.pair_counts {
            writeln!(w, "{i} {j} {c}")?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(f))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read<R: BufRead>(r: R, origin: &Path) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing header"))?
            .map_err(|e| Error::io(origin, e))?;
        let nums: Vec<u64> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| {
                Error::parse(
                    origin,
                    1,
                    "header must be `window_size total_windows vocab_size`",
                )
            })?;
        let [window_size, total_windows, vocab_size] = nums[..] else {
            return Err(Error::parse(
                origin,
                1,
                "header must be `window_size total_windows vocab_size`",
            ));
        };
        let mut stats = CooccurrenceStats {
            window_size: window_size as usize,
            total_windows,
            single_counts: vec![0; vocab_size as usize],
            pair_counts: Vec::new(),
        };
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let bad = || Error::parse(origin, n + 2, "expected `i count` or `i j count`");
            let f: Vec<u64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            match f[..] {
                [i, c] if (i as usize) < stats.single_counts.len() => {
                    stats.single_counts[i as usize] = c
                }
                [i, j, c] if i < j && j < vocab_size => {
                    stats.pair_counts.push(((i as TokenId, j as TokenId), c))
                }
                [] => {}
                _ => return Err(bad()),
            }
        }
        stats.pair_counts.sort_unstable_by_key(|&(k, _)| k);
        Ok(stats)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(f), path)
    }
}

/// Point-wise mutual information `ln(p(i,j) / (p(i) p(j)))` with window
/// probabilities. `None` when the joint count or a marginal is zero, or
/// when `i == j`.
pub fn pmi(stats: &CooccurrenceStats, i: TokenId, j: TokenId) -> Option<f64> {
    if i == j {
        return None;
    }
    pmi_from_counts(
        stats.pair(i, j),
        stats.single(i),
        stats.single(j),
        stats.total_windows,
    )
}

fn pmi_from_counts(joint: u64, wi: u64, wj: u64, total: u64) -> Option<f64> {
    if joint == 0 || wi == 0 || wj == 0 {
        return None;
    }
    Some((joint as f64 * total as f64 / (wi as f64 * wj as f64)).ln())
}

/// Symmetric `|V| × |V|` matrix holding `PMI(i, j)` wherever it is strictly
/// positive. The diagonal is left empty.
pub fn ppmi_matrix(stats: &CooccurrenceStats) -> SparseMatrix {
    let mut triplets = Vec::new();
    for &((i, j), c) in &stats.pair_counts {
        if let Some(v) = pmi_from_counts(c, stats.single(i), stats.single(j), stats.total_windows) {
            if v > 0.0 {
                triplets.push((i as usize, j as usize, v));
                triplets.push((j as usize, i as usize, v));
            }
        }
    }
    let n = stats.vocab_size();
    SparseMatrix::from_triplets(n, n, triplets).expect("pair ids are bounded by the vocabulary")
}
