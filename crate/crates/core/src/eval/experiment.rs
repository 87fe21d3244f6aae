use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::memory::PeakScope;
use super::metrics::{compute_metrics, Metrics};
use crate::corpus::{select_labelled_subset, ProcessedCorpus, Split, SplitAssignment};
use crate::embeddings::{
    average_document_embedding, train_pvdbow, train_pvdm, train_skipgram, EmbeddingKind,
    EmbeddingTable, EmbeddingTrainConfig,
};
use crate::error::{Error, Result};
use crate::features::{count_windows, ppmi_matrix, term_counts, tfidf};
use crate::graph::{
    build_adjacency, make_onehot_features, make_t2v_features, normalize_adjacency, HeteroGraph,
};
use crate::model::{
    gcn_predict, save_checkpoint, train_gcn, train_logreg, CheckpointHeader, EpochRecord,
    FeatureMatrix, GcnParams, LogRegConfig, LogRegParams, TensorEntry, TrainConfig,
};
use crate::numerics::{DenseMatrix, RandomSource, SparseMatrix};

pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
pub const DEFAULT_WINDOW: usize = 30;
pub const DEFAULT_LABEL_PROPORTION: f64 = 0.20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "textgcn")]
    TextGcn,
    #[serde(rename = "textgcn-t2v")]
    TextGcnT2v,
    #[serde(rename = "tfidf")]
    Tfidf,
    #[serde(rename = "counts")]
    Counts,
    #[serde(rename = "avg-embed")]
    AvgEmbed,
    #[serde(rename = "pvdbow")]
    PvDbow,
    #[serde(rename = "pvdm")]
    PvDm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::TextGcn,
        ModelKind::TextGcnT2v,
        ModelKind::Tfidf,
        ModelKind::Counts,
        ModelKind::AvgEmbed,
        ModelKind::PvDbow,
        ModelKind::PvDm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TextGcn => "textgcn",
            ModelKind::TextGcnT2v => "textgcn-t2v",
            ModelKind::Tfidf => "tfidf",
            ModelKind::Counts => "counts",
            ModelKind::AvgEmbed => "avg-embed",
            ModelKind::PvDbow => "pvdbow",
            ModelKind::PvDm => "pvdm",
        }
    }

    pub fn is_graph_model(self) -> bool {
        matches!(self, ModelKind::TextGcn | ModelKind::TextGcnT2v)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ModelKind::ALL.iter().map(|m| m.name()).collect();
                Error::invalid(format!(
                    "unknown model {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// How the labelled subset of the training split is chosen for each seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskPolicy {
    /// One mask drawn with this seed and shared by every run.
    Fixed { seed: u64 },
    /// A fresh mask per run, drawn with the run seed.
    PerSeed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// PPMI window for graph models; `None` omits word-word edges.
    pub window: Option<usize>,
    pub label_proportion: f64,
    pub mask: MaskPolicy,
    pub train: TrainConfig,
    pub logreg: LogRegConfig,
    /// Skip-gram and PV-DBOW settings.
    pub embedding: EmbeddingTrainConfig,
    pub pvdm_embedding: EmbeddingTrainConfig,
}

impl ExperimentConfig {
    pub fn new(model: ModelKind) -> Self {
        Self {
            model,
            window: Some(DEFAULT_WINDOW),
            label_proportion: DEFAULT_LABEL_PROPORTION,
            mask: MaskPolicy::Fixed { seed: 0 },
            train: TrainConfig::default(),
            logreg: LogRegConfig::default(),
            embedding: EmbeddingTrainConfig::default(),
            pvdm_embedding: EmbeddingTrainConfig::pvdm(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == Some(0) {
            return Err(Error::invalid("window size must be at least 1"));
        }
        if !(self.label_proportion > 0.0 && self.label_proportion <= 1.0) {
            return Err(Error::invalid(format!(
                "label proportion {} outside (0, 1]",
                self.label_proportion
            )));
        }
        self.train.validate()
    }
}

/// Outcome of one seed. `history` is empty for the logistic-regression models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub labelled: usize,
    pub metrics: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_epoch: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<EpochRecord>,
}

#[derive(Debug, Clone)]
pub enum TrainedModel {
    Gcn(GcnParams),
    LogReg(LogRegParams),
}

impl TrainedModel {
    /// Named parameter tensors in a fixed order. The logistic-regression bias
    /// is stored as a `1 × C` row.
    pub fn tensors(&self) -> Vec<(&'static str, DenseMatrix)> {
        match self {
            TrainedModel::Gcn(p) => {
                vec![("theta0", p.theta0.clone()), ("theta1", p.theta1.clone())]
            }
            TrainedModel::LogReg(p) => vec![
                ("weights", p.weights.clone()),
                (
                    "bias",
                    DenseMatrix::from_vec(1, p.bias.len(), p.bias.clone()).expect("bias row"),
                ),
            ],
        }
    }

    /// Writes the model with `config` embedded in the header.
    pub fn save_checkpoint(
        &self,
        path: &Path,
        config: &ExperimentConfig,
        seed: u64,
        epoch: usize,
    ) -> Result<()> {
        let tensors = self.tensors();
        let header = CheckpointHeader {
            model: config.model.name().to_owned(),
            seed,
            epoch,
            config: serde_json::to_value(config).map_err(|e| Error::invalid(e.to_string()))?,
            tensors: tensors
                .iter()
                .map(|(n, m)| TensorEntry {
                    name: (*n).to_owned(),
                    rows: m.rows(),
                    cols: m.cols(),
                })
                .collect(),
        };
        let refs: Vec<&DenseMatrix> = tensors.iter().map(|(_, m)| m).collect();
        save_checkpoint(path, &header, &refs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub per_seed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorAggregate {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub per_seed: Vec<Vec<f64>>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl Aggregate {
    pub fn from_values(per_seed: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&per_seed);
        Self {
            mean,
            std,
            per_seed,
        }
    }
}

impl VectorAggregate {
    pub fn from_values(per_seed: Vec<Vec<f64>>) -> Self {
        let width = per_seed.first().map_or(0, Vec::len);
        let (mean, std) = (0..width)
            .map(|c| mean_std(&per_seed.iter().map(|v| v[c]).collect::<Vec<_>>()))
            .unzip();
        Self {
            mean,
            std,
            per_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub model: ModelKind,
    pub seeds: Vec<u64>,
    pub accuracy: Aggregate,
    pub macro_f1: Aggregate,
    pub per_class_f1: VectorAggregate,
    pub runtime_s: f64,
    pub peak_mem_bytes: u64,
    pub config: ExperimentConfig,
    pub runs: Vec<SeedRun>,
}

impl ExperimentReport {
    /// Aggregates runs in ascending seed order, whatever order they finished in.
    pub fn from_runs(
        config: &ExperimentConfig,
        mut runs: Vec<SeedRun>,
        runtime_s: f64,
        peak_mem_bytes: u64,
    ) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::invalid("a report needs at least one seed run"));
        }
        runs.sort_by_key(|r| r.seed);
        if runs.windows(2).any(|w| w[0].seed == w[1].seed) {
            return Err(Error::invalid("duplicate seed in runs"));
        }
        Ok(Self {
            model: config.model,
            seeds: runs.iter().map(|r| r.seed).collect(),
            accuracy: Aggregate::from_values(runs.iter().map(|r| r.metrics.accuracy).collect()),
            macro_f1: Aggregate::from_values(runs.iter().map(|r| r.metrics.macro_f1).collect()),
            per_class_f1: VectorAggregate::from_values(
                runs.iter()
                    .map(|r| r.metrics.per_class_f1.clone())
                    .collect(),
            ),
            runtime_s,
            peak_mem_bytes,
            config: config.clone(),
            runs,
        })
    }
}

/// Completed runs plus the first failure, if any.
#[derive(Debug)]
pub struct SeededOutcome {
    pub runs: Vec<SeedRun>,
    pub failure: Option<(u64, Error)>,
    pub runtime_s: f64,
    pub peak_mem_bytes: u64,
}

/// Which trained embedding table a model consumes. Tables depend on the run
/// seed, so they are cached per `(role, seed)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingRole {
    /// Skip-gram word vectors.
    Word2Vec,
    PvDbow,
    PvDm,
}

impl EmbeddingRole {
    pub fn name(self) -> &'static str {
        match self {
            EmbeddingRole::Word2Vec => "word2vec",
            EmbeddingRole::PvDbow => "pvdbow",
            EmbeddingRole::PvDm => "pvdm",
        }
    }

    /// Tables `model` needs, in a fixed order.
    pub fn required_by(model: ModelKind) -> &'static [EmbeddingRole] {
        match model {
            ModelKind::TextGcnT2v => &[EmbeddingRole::Word2Vec, EmbeddingRole::PvDbow],
            ModelKind::PvDbow => &[EmbeddingRole::PvDbow],
            ModelKind::PvDm => &[EmbeddingRole::PvDm],
            _ => &[],
        }
    }

    /// Training settings for this role within `config`.
    pub fn train_config(self, config: &ExperimentConfig) -> &EmbeddingTrainConfig {
        match self {
            EmbeddingRole::PvDm => &config.pvdm_embedding,
            _ => &config.embedding,
        }
    }

    /// RNG stream name under the run seed. Both document models share one.
    fn stream(self) -> &'static str {
        match self {
            EmbeddingRole::Word2Vec => "word2vec",
            _ => "doc2vec",
        }
    }
}

impl fmt::Display for EmbeddingRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Corpus-level inputs shared by every run, with lazily built features and
/// graphs cached across seeds and sweep points.
pub struct Experiment<'a> {
    corpus: &'a ProcessedCorpus,
    split: &'a SplitAssignment,
    pretrained: Option<&'a EmbeddingTable>,
    tfidf: Option<SparseMatrix>,
    counts: Option<SparseMatrix>,
    averaged: Option<DenseMatrix>,
    graphs: BTreeMap<Option<usize>, HeteroGraph>,
    embeddings: BTreeMap<(EmbeddingRole, u64), (EmbeddingTrainConfig, EmbeddingTable)>,
    train_embeddings: bool,
}

impl<'a> Experiment<'a> {
    pub fn new(corpus: &'a ProcessedCorpus, split: &'a SplitAssignment) -> Result<Self> {
        corpus.validate()?;
        if corpus.n_classes() < 2 {
            return Err(Error::invalid(format!(
                "classification needs at least 2 classes, found {}",
                corpus.n_classes()
            )));
        }
        if split.len() != corpus.len() {
            return Err(Error::dims(
                "experiment",
                format!(
                    "split covers {} documents, corpus has {}",
                    split.len(),
                    corpus.len()
                ),
            ));
        }
        Ok(Self {
            corpus,
            split,
            pretrained: None,
            tfidf: None,
            counts: None,
            averaged: None,
            graphs: BTreeMap::new(),
            embeddings: BTreeMap::new(),
            train_embeddings: true,
        })
    }

    /// When off, a run whose embedding table was not inserted fails instead
    /// of training one.
    pub fn train_missing_embeddings(mut self, enabled: bool) -> Self {
        self.train_embeddings = enabled;
        self
    }

    /// Supplies a table previously trained with `config` for `(role, seed)`.
    pub fn insert_embedding(
        &mut self,
        role: EmbeddingRole,
        seed: u64,
        config: EmbeddingTrainConfig,
        table: EmbeddingTable,
    ) -> Result<()> {
        let expected = match role {
            EmbeddingRole::Word2Vec => EmbeddingKind::Word,
            _ => EmbeddingKind::Document,
        };
        if table.kind() != expected || table.dim() != config.dimension {
            return Err(Error::invalid(format!(
                "{role} table for seed {seed} has the wrong kind or dimension"
            )));
        }
        self.embeddings.insert((role, seed), (config, table));
        Ok(())
    }

    /// Table for `(role, seed)` under `config`, trained on first use.
    pub fn embedding(
        &mut self,
        role: EmbeddingRole,
        config: &ExperimentConfig,
        seed: u64,
    ) -> Result<&EmbeddingTable> {
        let wanted = role.train_config(config);
        let fresh = self
            .embeddings
            .get(&(role, seed))
            .is_some_and(|(c, _)| c == wanted);
        if !fresh {
            if !self.train_embeddings {
                return Err(Error::invalid(format!(
                    "no {role} embeddings for seed {seed}"
                )));
            }
            let corpus = self.corpus;
            let stream = RandomSource::new(seed).substream(role.stream()).seed();
            let table = match role {
                EmbeddingRole::Word2Vec => {
                    train_skipgram(&corpus.documents, &corpus.vocabulary, wanted, stream)?
                }
                EmbeddingRole::PvDbow => train_pvdbow(
                    &corpus.documents,
                    &corpus.doc_ids,
                    corpus.vocabulary.len(),
                    wanted,
                    stream,
                )?,
                EmbeddingRole::PvDm => train_pvdm(
                    &corpus.documents,
                    &corpus.doc_ids,
                    corpus.vocabulary.len(),
                    wanted,
                    stream,
                )?,
            };
            self.embeddings
                .insert((role, seed), (wanted.clone(), table));
        }
        Ok(&self.embeddings[&(role, seed)].1)
    }

    pub fn with_pretrained(mut self, table: &'a EmbeddingTable) -> Self {
        self.pretrained = Some(table);
        self.averaged = None;
        self
    }

    /// Supplies an already normalised graph for `window`.
    pub fn insert_graph(&mut self, window: Option<usize>, graph: HeteroGraph) -> Result<()> {
        if !graph.is_normalized()
            || graph.n_docs() != self.corpus.len()
            || graph.n_words() != self.corpus.vocabulary.len()
        {
            return Err(Error::invalid(
                "supplied graph does not match the corpus or is not normalized",
            ));
        }
        self.graphs.insert(window, graph);
        Ok(())
    }

    pub fn corpus(&self) -> &ProcessedCorpus {
        self.corpus
    }

    pub fn split(&self) -> &SplitAssignment {
        self.split
    }

    pub fn tfidf(&mut self) -> Result<&SparseMatrix> {
        if self.tfidf.is_none() {
            self.tfidf = Some(tfidf(&self.corpus.documents, &self.corpus.vocabulary)?);
        }
        Ok(self.tfidf.as_ref().expect("just built"))
    }

    fn counts(&mut self) -> Result<&SparseMatrix> {
        if self.counts.is_none() {
            self.counts = Some(term_counts(
                &self.corpus.documents,
                &self.corpus.vocabulary,
            )?);
        }
        Ok(self.counts.as_ref().expect("just built"))
    }

    /// Normalised graph for `window`, built on first use.
    pub fn graph(&mut self, window: Option<usize>) -> Result<&HeteroGraph> {
        if !self.graphs.contains_key(&window) {
            let graph = build_graph(self.corpus, self.tfidf()?, window)?;
            self.graphs.insert(window, graph);
        }
        Ok(&self.graphs[&window])
    }

    fn labelled_mask(&self, config: &ExperimentConfig, seed: u64) -> Result<Vec<bool>> {
        let mask_seed = match config.mask {
            MaskPolicy::Fixed { seed } => seed,
            MaskPolicy::PerSeed => seed,
        };
        select_labelled_subset(self.split, config.label_proportion, mask_seed)
    }

    /// Trains one model for one seed and scores it on the test split.
    pub fn run_once(
        &mut self,
        config: &ExperimentConfig,
        seed: u64,
    ) -> Result<(SeedRun, TrainedModel)> {
        config.validate()?;
        let labelled = self.labelled_mask(config, seed)?;
        let labelled_count = labelled.iter().filter(|&&l| l).count();
        let test_docs = self.split.indices(Split::Test);
        if test_docs.is_empty() {
            return Err(Error::invalid("test split is empty"));
        }
        let n_classes = self.corpus.n_classes();
        let golds: Vec<usize> = test_docs.iter().map(|&d| self.corpus.labels[d]).collect();

        let corpus = self.corpus;
        let split = self.split;
        let (predictions, model, best_epoch, history) = if config.model.is_graph_model() {
            let features = match config.model {
                ModelKind::TextGcn => make_onehot_features(self.graph(config.window)?),
                _ => {
                    self.graph(config.window)?;
                    self.embedding(EmbeddingRole::Word2Vec, config, seed)?;
                    self.embedding(EmbeddingRole::PvDbow, config, seed)?;
                    let words = &self.embeddings[&(EmbeddingRole::Word2Vec, seed)].1;
                    let docs = &self.embeddings[&(EmbeddingRole::PvDbow, seed)].1;
                    make_t2v_features(
                        &self.graphs[&config.window],
                        &corpus.vocabulary,
                        &corpus.doc_ids,
                        words,
                        docs,
                    )?
                }
            };
            let graph = self.graph(config.window)?;
            let n = graph.n_nodes();
            let mut labels = vec![0usize; n];
            labels[..corpus.len()].copy_from_slice(&corpus.labels);
            let mut train_mask = vec![false; n];
            train_mask[..corpus.len()].copy_from_slice(&labelled);
            let mut val_mask = vec![false; n];
            val_mask[..corpus.len()].copy_from_slice(&split.mask(Split::Validation));
            let train = TrainConfig {
                seed,
                ..config.train.clone()
            };
            let outcome = train_gcn(
                graph,
                &features,
                &labels,
                n_classes,
                &train_mask,
                &val_mask,
                &train,
            )?;
            let all = gcn_predict(graph, &features, &outcome.best)?;
            let predictions = test_docs.iter().map(|&d| all[d]).collect();
            (
                predictions,
                TrainedModel::Gcn(outcome.best),
                Some(outcome.best_epoch),
                outcome.history,
            )
        } else {
            let features = self.document_features(config, seed)?;
            let rows: Vec<usize> = (0..labelled.len()).filter(|&d| labelled[d]).collect();
            let train_x = features.select_rows(&rows)?;
            let train_y: Vec<usize> = rows.iter().map(|&d| self.corpus.labels[d]).collect();
            let fit = train_logreg(&train_x, &train_y, n_classes, &config.logreg)?;
            let predictions = fit.params.predict(&features.select_rows(&test_docs)?)?;
            (
                predictions,
                TrainedModel::LogReg(fit.params),
                None,
                Vec::new(),
            )
        };
        let metrics = compute_metrics(&predictions, &golds, n_classes)?;
        Ok((
            SeedRun {
                seed,
                labelled: labelled_count,
                metrics,
                best_epoch,
                history,
            },
            model,
        ))
    }

    /// Document-by-feature matrix for the logistic-regression baselines.
    fn document_features(&mut self, config: &ExperimentConfig, seed: u64) -> Result<FeatureMatrix> {
        let corpus = self.corpus;
        let table_rows = |table: &EmbeddingTable| -> Result<FeatureMatrix> {
            let mut m = DenseMatrix::zeros(corpus.len(), table.dim());
            for (d, id) in corpus.doc_ids.iter().enumerate() {
                let v = table
                    .get(&EmbeddingTable::doc_key(id))
                    .ok_or_else(|| Error::invalid(format!("no vector for document {id}")))?;
                m.row_mut(d).copy_from_slice(v);
            }
            Ok(FeatureMatrix::Dense(m))
        };
        Ok(match config.model {
            ModelKind::Tfidf => FeatureMatrix::sparse(self.tfidf()?.clone()),
            ModelKind::Counts => FeatureMatrix::sparse(self.counts()?.clone()),
            ModelKind::AvgEmbed => {
                if self.averaged.is_none() {
                    let table = self.pretrained.ok_or_else(|| {
                        Error::invalid("avg-embed needs a pretrained word embedding table")
                    })?;
                    if table.kind() != EmbeddingKind::Word {
                        return Err(Error::invalid("avg-embed needs a word embedding table"));
                    }
                    let mut m = DenseMatrix::zeros(corpus.len(), table.dim());
                    for d in 0..corpus.len() {
                        m.row_mut(d).copy_from_slice(&average_document_embedding(
                            &corpus.token_strings(d),
                            table,
                        ));
                    }
                    self.averaged = Some(m);
                }
                FeatureMatrix::Dense(self.averaged.clone().expect("just built"))
            }
            ModelKind::PvDbow => {
                table_rows(self.embedding(EmbeddingRole::PvDbow, config, seed)?)?
            }
            ModelKind::PvDm => table_rows(self.embedding(EmbeddingRole::PvDm, config, seed)?)?,
            ModelKind::TextGcn | ModelKind::TextGcnT2v => {
                unreachable!("graph models are handled by run_once")
            }
        })
    }

    /// Runs every seed in order, stopping at the first failure. `on_model`
    /// sees each trained model as soon as its run finishes.
    pub fn run_seeded_with(
        &mut self,
        config: &ExperimentConfig,
        seeds: &[u64],
        mut on_model: impl FnMut(&SeedRun, &TrainedModel) -> Result<()>,
    ) -> Result<SeededOutcome> {
        if seeds.is_empty() {
            return Err(Error::invalid("at least one seed is required"));
        }
        config.validate()?;
        let started = Instant::now();
        let scope = PeakScope::start();
        let mut runs = Vec::with_capacity(seeds.len());
        let mut failure = None;
        for &seed in seeds {
            match self
                .run_once(config, seed)
                .and_then(|(run, model)| on_model(&run, &model).map(|_| run))
            {
                Ok(run) => runs.push(run),
                Err(e) => {
                    failure = Some((seed, e));
                    break;
                }
            }
        }
        Ok(SeededOutcome {
            runs,
            failure,
            runtime_s: started.elapsed().as_secs_f64(),
            peak_mem_bytes: scope.peak_above_base() as u64,
        })
    }

    /// All seeds must succeed; see [`Experiment::run_seeded_with`] to keep
    /// partial results.
    pub fn run_seeded(
        &mut self,
        config: &ExperimentConfig,
        seeds: &[u64],
    ) -> Result<ExperimentReport> {
        let outcome = self.run_seeded_with(config, seeds, |_, _| Ok(()))?;
        if let Some((seed, e)) = outcome.failure {
            return Err(Error::invalid(format!(
                "seed {seed} failed after {} completed run(s): {e}",
                outcome.runs.len()
            )));
        }
        ExperimentReport::from_runs(
            config,
            outcome.runs,
            outcome.runtime_s,
            outcome.peak_mem_bytes,
        )
    }
}

/// Builds and normalises the heterogeneous graph. `window = None` leaves the
/// word-word block empty.
pub fn build_graph(
    corpus: &ProcessedCorpus,
    tfidf: &SparseMatrix,
    window: Option<usize>,
) -> Result<HeteroGraph> {
    let v = corpus.vocabulary.len();
    let ppmi = match window {
        Some(w) => ppmi_matrix(&count_windows(&corpus.documents, v, w)?),
        None => SparseMatrix::empty(v, v),
    };
    normalize_adjacency(&build_adjacency(tfidf, &ppmi)?)
}
