use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!("unknown split `{other}`"))),
        }
    }
}

/// Per-document split tags plus the labelled-train mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    pub splits: Vec<Split>,
    pub labelled: Vec<bool>,
}

impl SplitAssignment {
    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        self.splits
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == which)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, which: Split) -> usize {
        self.splits.iter().filter(|s| **s == which).count()
    }

    pub fn mask(&self, which: Split) -> Vec<bool> {
        self.splits.iter().map(|s| *s == which).collect()
    }

    pub fn labelled_count(&self) -> usize {
        self.labelled.iter().filter(|&&b| b).count()
    }

    /// Replaces the labelled mask; it must select train documents only.
    pub fn with_labelled(mut self, labelled: Vec<bool>) -> Result<Self> {
        if labelled.len() != self.splits.len() {
            return Err(Error::dims(
                "with_labelled",
                format!("{} flags for {} documents", labelled.len(), self.len()),
            ));
        }
        if labelled
            .iter()
            .zip(&self.splits)
            .any(|(&l, &s)| l && s != Split::Train)
        {
            return Err(Error::invalid("labelled mask selects a non-train document"));
        }
        self.labelled = labelled;
        Ok(self)
    }

    /// Per-class `(train, validation, test)` counts.
    pub fn class_table(&self, labels: &[usize], n_classes: usize) -> Vec<[usize; 3]> {
        let mut table = vec![[0usize; 3]; n_classes];
        for (&s, &y) in self.splits.iter().zip(labels) {
            table[y][s as usize] += 1;
        }
        table
    }

    pub fn write_csv<W: std::io::Write>(&self, doc_ids: &[String], w: W) -> Result<()> {
        if doc_ids.len() != self.len() {
            return Err(Error::dims(
                "SplitAssignment::write_csv",
                "doc id count differs from split length",
            ));
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["doc_id", "split", "labelled"])?;
        for ((id, s), l) in doc_ids.iter().zip(&self.splits).zip(&self.labelled) {
            out.write_record([id.as_str(), &s.to_string(), if *l { "1" } else { "0" }])?;
        }
        out.flush().map_err(|e| Error::io("<split csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, doc_ids: &[String], path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(doc_ids, std::io::BufWriter::new(f))
    }

    /// Reads `doc_id,split,labelled` rows; returns document ids alongside.
    pub fn read_csv<R: std::io::Read>(
        r: R,
        origin: &Path,
    ) -> Result<(Vec<String>, SplitAssignment)> {
        let mut reader = csv::Reader::from_reader(r);
        let mut ids = Vec::new();
        let mut splits = Vec::new();
        let mut labelled = Vec::new();
        for (n, rec) in reader.records().enumerate() {
            let rec = rec?;
            let line = n + 2;
            if rec.len() != 3 {
                return Err(Error::parse(
                    origin,
                    line,
                    "expected `doc_id,split,labelled`",
                ));
            }
            ids.push(rec[0].to_owned());
            splits.push(
                rec[1]
                    .parse()
                    .map_err(|e: Error| Error::parse(origin, line, e.to_string()))?,
            );
            labelled.push(match &rec[2] {
                "1" => true,
                "0" => false,
                _ => return Err(Error::parse(origin, line, "labelled must be 0 or 1")),
            });
        }
        let split = SplitAssignment {
            splits,
            labelled: vec![false; ids.len()],
        }
        .with_labelled(labelled)
        .map_err(|e| Error::parse(origin, 0, e.to_string()))?;
        Ok((ids, split))
    }

    pub fn load_csv(path: &Path) -> Result<(Vec<String>, SplitAssignment)> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f), path)
    }
}

/// Largest-remainder apportionment of `target` items across groups in
/// proportion to `sizes`. Ties in the remainder go to the lower index.
fn apportion(sizes: &[usize], target: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let (t, n) = (target as u128, total as u128);
    let mut shares: Vec<usize> = sizes
        .iter()
        .map(|&s| (s as u128 * t / n) as usize)
        .collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(sizes[i] as u128 * t % n), i));
    let missing = target - shares.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        shares[i] += 1;
    }
    shares
}

/// Stratified train/validation/test split.
///
/// The train total is `floor(N·a/(a+b+c))`; the remainder is divided between
/// validation and test as `round(R·b/(b+c))` and the rest. Both totals are
/// apportioned across classes by largest remainder, then each class's
/// documents are shuffled with the seed and assigned contiguously.
pub fn split_labels(
    labels: &[usize],
    n_classes: usize,
    ratios: (u32, u32, u32),
    seed: u64,
) -> Result<SplitAssignment> {
    let n = labels.len();
    if n < 10 {
        return Err(Error::invalid(format!(
            "need at least 10 documents to split, got {n}"
        )));
    }
    let (a, b, c) = (ratios.0 as usize, ratios.1 as usize, ratios.2 as usize);
    if a == 0 || b + c == 0 {
        return Err(Error::invalid(
            "split ratios need a non-zero train part and a non-zero held-out part",
        ));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (d, &y) in labels.iter().enumerate() {
        if y >= n_classes {
            return Err(Error::invalid(format!(
                "document {d} has label {y} >= {n_classes}"
            )));
        }
        members[y].push(d);
    }
    if let Some(small) = members.iter().position(|m| m.len() < 3) {
        return Err(Error::invalid(format!(
            "class {small} has {} documents; at least 3 required",
            members[small].len()
        )));
    }
    let train_total = n * a / (a + b + c);
    let rest = n - train_total;
    let val_total = (2 * rest * b + (b + c)) / (2 * (b + c));

    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let train = apportion(&sizes, train_total);
    let remaining: Vec<usize> = sizes.iter().zip(&train).map(|(s, t)| s - t).collect();
    let val = apportion(&remaining, val_total);

    let mut rng = RandomSource::new(seed).substream("split");
    let mut splits = vec![Split::Test; n];
    for (k, docs) in members.iter_mut().enumerate() {
        docs.shuffle(&mut rng);
        for (pos, &d) in docs.iter().enumerate() {
            splits[d] = if pos < train[k] {
                Split::Train
            } else if pos < train[k] + val[k] {
                Split::Validation
            } else {
                Split::Test
            };
        }
    }
    Ok(SplitAssignment {
        splits,
        labelled: vec![false; n],
    })
}

/// Uniformly samples `round(p·|train|)` train documents without replacement.
pub fn select_labelled_subset(
    split: &SplitAssignment,
    proportion: f64,
    seed: u64,
) -> Result<Vec<bool>> {
    if !(proportion > 0.0 && proportion <= 1.0) {
        return Err(Error::invalid(format!(
            "label proportion {proportion} outside (0, 1]"
        )));
    }
    let train = split.indices(Split::Train);
    if train.is_empty() {
        return Err(Error::invalid("train split is empty"));
    }
    let k = (proportion * train.len() as f64).round() as usize;
    if k == 0 {
        return Err(Error::invalid(format!(
            "label proportion {proportion} selects no documents out of {}",
            train.len()
        )));
    }
    let mut rng = RandomSource::new(seed).substream("labels");
    let mut mask = vec![false; split.len()];
    for i in index::sample(&mut rng, train.len(), k) {
        mask[train[i]] = true;
    }
    Ok(mask)
}
