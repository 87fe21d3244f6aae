use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Child, Command as Process};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use textgraph::corpus::{
    default_stopwords, parse_stopwords, preprocess, read_dataset, split_corpus, IdentityStemmer,
    ProcessedCorpus, Split, SplitAssignment, Stemmer, TableStemmer,
};
use textgraph::embeddings::{load_pretrained, EmbeddingKind, EmbeddingTable};
use textgraph::eval::memory::PeakScope;
use textgraph::eval::{
    build_graph, emit_report, EmbeddingRole, Experiment, ExperimentConfig, ExperimentReport,
    ModelKind, SeedRun,
};
use textgraph::features::tfidf;
use textgraph::graph::HeteroGraph;

use crate::args::{
    EmbedArgs, GraphArgs, PreprocessArgs, RunArgs, SweepArgs, SweepKind, TrainArgs, WorkerArgs,
};
use crate::artifacts::{ensure_parent, hash_parts, is_fresh, read, require, write_key, Workdir};

/// Bumped whenever an artifact format or pipeline step changes.
const PIPELINE_VERSION: &[u8] = b"textgraph-1";

pub fn preprocess_cmd(wd: &Workdir, args: &PreprocessArgs) -> Result<()> {
    let dataset = read(&args.dataset)?;
    let stopword_bytes = args.stopwords.as_deref().map(read).transpose()?;
    let stemmer_bytes = args.stemmer_table.as_deref().map(read).transpose()?;
    let key = hash_parts(&[
        PIPELINE_VERSION,
        &dataset,
        stopword_bytes.as_deref().unwrap_or(b"<default stopwords>"),
        stemmer_bytes.as_deref().unwrap_or(b"<identity stemmer>"),
        &args.split_seed.to_le_bytes(),
    ]);
    let outputs = [wd.corpus(), wd.vocab(), wd.split(), wd.preprocess_report()];
    let refs: Vec<&Path> = outputs.iter().map(|p| p.as_path()).collect();
    if is_fresh(&wd.preprocess_key(), &key, &refs) {
        println!("preprocessing is up to date");
    } else {
        let stopwords = match &stopword_bytes {
            Some(b) => {
                parse_stopwords(std::str::from_utf8(b).context("stopword file is not UTF-8")?)
            }
            None => default_stopwords(),
        };
        let stemmer: Box<dyn Stemmer> = match &args.stemmer_table {
            Some(path) => Box::new(TableStemmer::load(path)?),
            None => Box::new(IdentityStemmer),
        };
        let raw = read_dataset(&args.dataset)?;
        let (corpus, report) = preprocess(&raw, &stopwords, stemmer.as_ref())?;
        let split = split_corpus(&corpus, (8, 1, 1), args.split_seed)?;
        corpus.save(&wd.corpus(), &wd.vocab())?;
        split.save_csv(&corpus.doc_ids, &wd.split())?;
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        fs::write(wd.preprocess_report(), text)?;
        write_key(&wd.preprocess_key(), &key)?;
        println!(
            "{} documents read, {} blank, {} empty after cleaning; {} tokens discarded as too long, {} stemmer failures",
            report.input_documents,
            report.dropped_blank,
            report.dropped_empty_after_processing,
            report.discarded_long_tokens,
            report.stem_failures
        );
    }
    let (corpus, split) = wd.load_corpus()?;
    print!("{}", split_table(&corpus, &split));
    Ok(())
}

fn split_table(corpus: &ProcessedCorpus, split: &SplitAssignment) -> String {
    let rows = split.class_table(&corpus.labels, corpus.n_classes());
    let width = corpus
        .class_names
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(5);
    let mut out = format!(
        "{:<width$} {:>8} {:>10} {:>8} {:>8}\n",
        "class", "train", "validation", "test", "total"
    );
    let line = |name: &str, r: [usize; 3]| {
        format!(
            "{name:<width$} {:>8} {:>10} {:>8} {:>8}\n",
            r[0],
            r[1],
            r[2],
            r[0] + r[1] + r[2]
        )
    };
    for (name, r) in corpus.class_names.iter().zip(&rows) {
        out.push_str(&line(name, *r));
    }
    let totals = [Split::Train, Split::Validation, Split::Test].map(|s| split.count(s));
    out.push_str(&line("total", totals));
    out
}

/// Builds the graph for `window` unless a cached copy matches the corpus.
fn ensure_graph(wd: &Workdir, window: Option<usize>) -> Result<()> {
    let (coo, sidecar, key_file) = wd.graph(window);
    let key = graph_key(wd, window)?;
    if is_fresh(&key_file, &key, &[&coo, &sidecar]) {
        return Ok(());
    }
    let (corpus, _) = wd.load_corpus()?;
    let graph = build_graph(
        &corpus,
        &tfidf(&corpus.documents, &corpus.vocabulary)?,
        window,
    )?;
    ensure_parent(&coo)?;
    graph.save(&coo, &sidecar, window)?;
    write_key(&key_file, &key)?;
    Ok(())
}

fn graph_key(wd: &Workdir, window: Option<usize>) -> Result<String> {
    let w = serde_json::to_vec(&window)?;
    Ok(hash_parts(&[
        PIPELINE_VERSION,
        wd.corpus_key()?.as_bytes(),
        &w,
    ]))
}

pub fn build_graph_cmd(wd: &Workdir, args: &GraphArgs) -> Result<()> {
    let window = args.window();
    ensure_graph(wd, window)?;
    let (graph, _) = load_graph(wd, window)?;
    println!(
        "graph: {} documents, {} words, {} stored entries, {} word-word edges",
        graph.n_docs(),
        graph.n_words(),
        graph.adjacency().nnz(),
        graph.word_word_edges()
    );
    Ok(())
}

/// Loads a graph artifact, refusing one built from a different corpus.
fn load_graph(wd: &Workdir, window: Option<usize>) -> Result<(HeteroGraph, Option<usize>)> {
    let (coo, sidecar, key_file) = wd.graph(window);
    require(&coo, "build-graph")?;
    require(&sidecar, "build-graph")?;
    if !is_fresh(&key_file, &graph_key(wd, window)?, &[&coo, &sidecar]) {
        bail!(
            "{} was built from a different corpus; rerun `textgraph build-graph`",
            coo.display()
        );
    }
    let (graph, meta) = HeteroGraph::load(&coo, &sidecar)?;
    if meta.window_size != window {
        bail!(
            "{} records window {:?}, expected {:?}",
            sidecar.display(),
            meta.window_size,
            window
        );
    }
    Ok((graph, meta.window_size))
}

fn embedding_key(
    wd: &Workdir,
    role: EmbeddingRole,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<String> {
    let settings = serde_json::to_vec(role.train_config(config))?;
    Ok(hash_parts(&[
        PIPELINE_VERSION,
        wd.corpus_key()?.as_bytes(),
        role.name().as_bytes(),
        &settings,
        &seed.to_le_bytes(),
    ]))
}

fn embedding_kind(role: EmbeddingRole) -> EmbeddingKind {
    match role {
        EmbeddingRole::Word2Vec => EmbeddingKind::Word,
        _ => EmbeddingKind::Document,
    }
}

pub fn embed_cmd(wd: &Workdir, args: &EmbedArgs) -> Result<()> {
    let roles = EmbeddingRole::required_by(args.model);
    if roles.is_empty() {
        bail!("model {} uses no trained embeddings", args.model);
    }
    let mut config = ExperimentConfig::new(args.model);
    args.embedding.apply(&mut config);
    let (corpus, split) = wd.load_corpus()?;
    let mut experiment = Experiment::new(&corpus, &split)?;
    for &seed in &args.seeds {
        for &role in roles {
            let (path, key_file) = wd.embedding(role, seed);
            let key = embedding_key(wd, role, &config, seed)?;
            if is_fresh(&key_file, &key, &[&path]) {
                println!("{role} seed {seed}: up to date");
                continue;
            }
            let table = experiment.embedding(role, &config, seed)?;
            ensure_parent(&path)?;
            table.save(&path)?;
            write_key(&key_file, &key)?;
            println!(
                "{role} seed {seed}: {} vectors of dimension {}",
                table.len(),
                table.dim()
            );
        }
    }
    Ok(())
}

/// Attaches every cached artifact `config` needs for `seeds`.
fn attach_artifacts(
    wd: &Workdir,
    experiment: &mut Experiment<'_>,
    config: &ExperimentConfig,
    seeds: &[u64],
    build_graphs: bool,
) -> Result<()> {
    if config.model.is_graph_model() {
        if build_graphs {
            ensure_graph(wd, config.window)?;
        }
        let (graph, window) = load_graph(wd, config.window)?;
        experiment.insert_graph(window, graph)?;
    }
    for &role in EmbeddingRole::required_by(config.model) {
        for &seed in seeds {
            let (path, key_file) = wd.embedding(role, seed);
            require(&path, &format!("embed --model {}", config.model))?;
            if !is_fresh(&key_file, &embedding_key(wd, role, config, seed)?, &[&path]) {
                bail!(
                    "{} does not match the corpus or embedding settings; rerun `textgraph embed --model {}`",
                    path.display(),
                    config.model
                );
            }
            let table = EmbeddingTable::load(&path, embedding_kind(role))?;
            experiment.insert_embedding(role, seed, role.train_config(config).clone(), table)?;
        }
    }
    Ok(())
}

fn load_pretrained_table(run: &RunArgs, models: &[ModelKind]) -> Result<Option<EmbeddingTable>> {
    if !models.contains(&ModelKind::AvgEmbed) {
        return Ok(None);
    }
    let path = run
        .pretrained
        .as_deref()
        .ok_or_else(|| anyhow!("avg-embed needs --pretrained <word vectors>"))?;
    Ok(Some(load_pretrained(path)?))
}

fn run_name(config: &ExperimentConfig) -> String {
    let window = match config.window {
        Some(w) => format!("w{w}"),
        None => "no-ppmi".to_owned(),
    };
    if config.model.is_graph_model() {
        format!("{}-{window}-p{}", config.model, config.label_proportion)
    } else {
        format!("{}-p{}", config.model, config.label_proportion)
    }
}

fn checkpoint_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed{seed}.ckpt"))
}

/// Outcome written by a worker process.
#[derive(Debug, Serialize, Deserialize)]
struct WorkerOutcome {
    run: SeedRun,
    peak_mem_bytes: u64,
}

/// Trains every seed, writes checkpoints and the report. Returns false when
/// any seed failed; completed seeds are still reported.
pub fn train_cmd(wd: &Workdir, args: &TrainArgs) -> Result<bool> {
    let config = args.run.config(args.model);
    config.validate()?;
    let seeds = dedup_seeds(&args.run.seeds)?;
    let dir = wd.run_dir(&run_name(&config));
    fs::create_dir_all(&dir)?;

    let started = Instant::now();
    let (runs, peak, failures) = if args.jobs > 1 && seeds.len() > 1 {
        run_workers(wd, args, &seeds)?
    } else {
        let (corpus, split) = wd.load_corpus()?;
        let pretrained = load_pretrained_table(&args.run, &[args.model])?;
        let mut experiment = Experiment::new(&corpus, &split)?.train_missing_embeddings(false);
        if let Some(t) = &pretrained {
            experiment = experiment.with_pretrained(t);
        }
        attach_artifacts(wd, &mut experiment, &config, &seeds, false)?;
        let outcome = experiment.run_seeded_with(&config, &seeds, |run, model| {
            model.save_checkpoint(
                &checkpoint_path(&dir, run.seed),
                &config,
                run.seed,
                run.best_epoch.unwrap_or(0),
            )
        })?;
        let failures: Vec<String> = outcome
            .failure
            .into_iter()
            .map(|(seed, e)| format!("seed {seed}: {e}"))
            .collect();
        (outcome.runs, outcome.peak_mem_bytes, failures)
    };
    for f in &failures {
        eprintln!("error: {f}");
    }
    if runs.is_empty() {
        bail!("no seed completed");
    }
    let report = ExperimentReport::from_runs(&config, runs, started.elapsed().as_secs_f64(), peak)?;
    emit_report(&dir, std::slice::from_ref(&report), &[])?;
    println!(
        "{} over {} seed(s): accuracy {:.4} ± {:.4}, macro F1 {:.4} ± {:.4}",
        report.model,
        report.seeds.len(),
        report.accuracy.mean,
        report.accuracy.std,
        report.macro_f1.mean,
        report.macro_f1.std
    );
    println!("results in {}", dir.display());
    Ok(failures.is_empty())
}

fn dedup_seeds(seeds: &[u64]) -> Result<Vec<u64>> {
    let mut out = seeds.to_vec();
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        bail!("at least one seed is required");
    }
    Ok(out)
}

/// Runs each seed in its own process, at most `jobs` at a time.
fn run_workers(
    wd: &Workdir,
    args: &TrainArgs,
    seeds: &[u64],
) -> Result<(Vec<SeedRun>, u64, Vec<String>)> {
    let exe = std::env::current_exe().context("locating the textgraph executable")?;
    let request = serde_json::to_string(args)?;
    let scratch = wd.scratch();
    fs::create_dir_all(&scratch)?;
    let mut pending = seeds.iter().copied();
    let mut running: Vec<(u64, Child)> = Vec::new();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut peak = 0;
    let output_for = |seed: u64| {
        scratch.join(format!(
            "{}-seed{seed}.json",
            run_name(&args.run.config(args.model))
        ))
    };
    loop {
        while running.len() < args.jobs as usize {
            let Some(seed) = pending.next() else { break };
            let child = Process::new(&exe)
                .arg("--workdir")
                .arg(wd.root())
                .args([
                    "worker",
                    "--request",
                    &request,
                    "--seed",
                    &seed.to_string(),
                    "--output",
                ])
                .arg(output_for(seed))
                .spawn()
                .with_context(|| format!("starting worker for seed {seed}"))?;
            running.push((seed, child));
        }
        if running.is_empty() {
            break;
        }
        let (seed, mut child) = running.remove(0);
        let status = child.wait()?;
        let out = output_for(seed);
        if !status.success() {
            failures.push(format!("seed {seed}: worker exited with {status}"));
            continue;
        }
        let outcome: WorkerOutcome = serde_json::from_slice(&read(&out)?)?;
        fs::remove_file(&out).ok();
        peak = peak.max(outcome.peak_mem_bytes);
        runs.push(outcome.run);
    }
    Ok((runs, peak, failures))
}

pub fn worker_cmd(wd: &Workdir, args: &WorkerArgs) -> Result<()> {
    let train: TrainArgs =
        serde_json::from_str(&args.request).context("decoding worker request")?;
    let config = train.run.config(train.model);
    let dir = wd.run_dir(&run_name(&config));
    let (corpus, split) = wd.load_corpus()?;
    let pretrained = load_pretrained_table(&train.run, &[train.model])?;
    let mut experiment = Experiment::new(&corpus, &split)?.train_missing_embeddings(false);
    if let Some(t) = &pretrained {
        experiment = experiment.with_pretrained(t);
    }
    attach_artifacts(wd, &mut experiment, &config, &[args.seed], false)?;
    let scope = PeakScope::start();
    let (run, model) = experiment.run_once(&config, args.seed)?;
    model.save_checkpoint(
        &checkpoint_path(&dir, args.seed),
        &config,
        args.seed,
        run.best_epoch.unwrap_or(0),
    )?;
    let outcome = WorkerOutcome {
        run,
        peak_mem_bytes: scope.peak_above_base() as u64,
    };
    fs::write(&args.output, serde_json::to_vec(&outcome)?)
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

pub fn sweep_cmd(wd: &Workdir, args: &SweepArgs) -> Result<()> {
    let models = &args.models;
    let base = args.run.config(models[0]);
    base.validate()?;
    let seeds = dedup_seeds(&args.run.seeds)?;
    let (corpus, split) = wd.load_corpus()?;
    let pretrained = load_pretrained_table(&args.run, models)?;
    let mut experiment = Experiment::new(&corpus, &split)?.train_missing_embeddings(false);
    if let Some(t) = &pretrained {
        experiment = experiment.with_pretrained(t);
    }
    let sweep = match args.sweep {
        SweepKind::Labels => {
            for &model in models {
                attach_artifacts(
                    wd,
                    &mut experiment,
                    &ExperimentConfig {
                        model,
                        ..base.clone()
                    },
                    &seeds,
                    true,
                )?;
            }
            experiment.sweep_label_proportion(&args.proportions, models, &base, &seeds)?
        }
        SweepKind::Window => {
            if !base.model.is_graph_model() {
                bail!("a window sweep needs a graph model, got {}", base.model);
            }
            let mut sizes: Vec<Option<usize>> = args.sizes.iter().copied().map(Some).collect();
            if args.include_no_ppmi {
                sizes.push(None);
            }
            for &window in &sizes {
                attach_artifacts(
                    wd,
                    &mut experiment,
                    &ExperimentConfig {
                        window,
                        ..base.clone()
                    },
                    &seeds,
                    true,
                )?;
            }
            experiment.sweep_window_size(&sizes, &base, &seeds)?
        }
    };
    let dir = wd.sweep_dir(&sweep.name);
    fs::create_dir_all(&dir)?;
    emit_report(&dir, &[], std::slice::from_ref(&sweep))?;
    for p in &sweep.points {
        println!(
            "{} {}={}: macro F1 {:.4} ± {:.4}",
            p.report.model, sweep.x_label, p.x, p.report.macro_f1.mean, p.report.macro_f1.std
        );
    }
    println!("results in {}", dir.display());
    Ok(())
}
