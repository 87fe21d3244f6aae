//! Single-instance comparisons against the oracles. Each returns `Err` with
//! a description of the first discrepancy.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use textgraph::features::{count_windows, ppmi_matrix, tfidf};
use textgraph::graph::{build_adjacency, normalize_adjacency, HeteroGraph, NodeFeatures};
use textgraph::model::{
    gcn_backward, gcn_forward, logreg_loss_and_grad, masked_cross_entropy, train_gcn,
    FeatureMatrix, GcnParams, LogRegParams, TrainConfig,
};
use textgraph::{DenseMatrix, RandomSource, SparseMatrix};

use super::*;

pub fn check_cooccurrence(c: &SmallCorpus, window: usize) -> Result<(), String> {
    let v = c.vocab.len();
    let stats = count_windows(&c.docs, v, window).map_err(|e| e.to_string())?;
    let oracle = enumerate_windows(&c.docs, v, window);
    if stats.total_windows != oracle.total {
        return Err(format!(
            "total windows {} vs oracle {}",
            stats.total_windows, oracle.total
        ));
    }
    if stats.single_counts != oracle.single {
        return Err(format!(
            "single counts {:?} vs oracle {:?}",
            stats.single_counts, oracle.single
        ));
    }
    let pairs: Vec<((u32, u32), u64)> = oracle.pairs.iter().map(|(&k, &n)| (k, n)).collect();
    if stats.pair_counts != pairs {
        return Err(format!(
            "pair counts {:?} vs oracle {:?}",
            stats.pair_counts, pairs
        ));
    }
    let got = ppmi_matrix(&stats).to_dense();
    let want = dense_ppmi(&oracle);
    let diff = got.max_abs_diff(&want);
    if diff > 1e-12 {
        return Err(format!("PPMI differs by {diff:e}"));
    }
    Ok(())
}

pub fn build_graph(c: &SmallCorpus, window: Option<usize>) -> HeteroGraph {
    let v = c.vocab.len();
    let ppmi = match window {
        Some(w) => ppmi_matrix(&count_windows(&c.docs, v, w).unwrap()),
        None => SparseMatrix::empty(v, v),
    };
    build_adjacency(&tfidf(&c.docs, &c.vocab).unwrap(), &ppmi).unwrap()
}

pub fn check_adjacency(c: &SmallCorpus, window: Option<usize>) -> Result<(), String> {
    let raw = build_graph(c, window);
    let dense = raw.adjacency().to_dense();
    let want = dense_adjacency(&c.docs, c.vocab.len(), window);
    let diff = dense.max_abs_diff(&want);
    if diff > 1e-12 {
        return Err(format!("unnormalised adjacency differs by {diff:e}"));
    }
    for i in 0..raw.n_nodes() {
        if raw.adjacency().get(i, i) != Some(1.0) {
            return Err(format!(
                "diagonal entry {i} is {:?}",
                raw.adjacency().get(i, i)
            ));
        }
    }
    let d = raw.n_docs();
    for (i, j, _) in raw.adjacency().triplets() {
        if i < d && j < d && i != j {
            return Err(format!("document-document edge ({i}, {j})"));
        }
    }
    let norm = normalize_adjacency(&raw).map_err(|e| e.to_string())?;
    let diff = norm
        .adjacency()
        .to_dense()
        .max_abs_diff(&dense_normalize(&want));
    if diff > 1e-12 {
        return Err(format!("normalised adjacency differs by {diff:e}"));
    }
    Ok(())
}

/// Random normalised graph with at most 10 nodes.
pub fn tiny_graph(rng: &mut RandomSource) -> (SmallCorpus, HeteroGraph) {
    loop {
        let c = random_corpus(rng, 4, 8, 6);
        if c.docs.len() + c.vocab.len() <= 10 {
            let window = rng.random_range(1..=5);
            let g = normalize_adjacency(&build_graph(&c, Some(window))).unwrap();
            return (c, g);
        }
    }
}

fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut RandomSource) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0))
}

/// One random GCN parameterisation; returns the largest relative error.
pub fn check_gcn_gradients(rng: &mut RandomSource, dense_features: bool) -> Result<f64, String> {
    let (_, graph) = tiny_graph(rng);
    let n = graph.n_nodes();
    let (hidden, classes) = (4, 3);
    let x = if dense_features {
        NodeFeatures::Dense(random_matrix(n, 5, 1.0, rng))
    } else {
        NodeFeatures::OneHot { n_nodes: n }
    };
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
    let mut mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    mask[rng.random_range(0..n)] = true;
    // Stay away from ReLU kinks so central differences are valid.
    let params = loop {
        let p = GcnParams {
            theta0: random_matrix(x.dim(), hidden, 1.0, rng),
            theta1: random_matrix(hidden, classes, 1.0, rng),
        };
        if pre_activation(&graph, &x, &p)
            .as_slice()
            .iter()
            .all(|v| v.abs() > 1e-3)
        {
            break p;
        }
    };
    let cache = gcn_forward(&graph, &x, &params, 0.0, rng, true).map_err(|e| e.to_string())?;
    let grads =
        gcn_backward(&graph, &x, &params, &cache, &labels, &mask).map_err(|e| e.to_string())?;
    let num0 = numeric_gradient(&params.theta0, |t| {
        gcn_loss(
            &graph,
            &x,
            &GcnParams {
                theta0: t.clone(),
                theta1: params.theta1.clone(),
            },
            &labels,
            &mask,
        )
    });
    let num1 = numeric_gradient(&params.theta1, |t| {
        gcn_loss(
            &graph,
            &x,
            &GcnParams {
                theta0: params.theta0.clone(),
                theta1: t.clone(),
            },
            &labels,
            &mask,
        )
    });
    let err =
        max_relative_error(&grads.theta0, &num0).max(max_relative_error(&grads.theta1, &num1));
    if err > 1e-5 {
        return Err(format!("GCN gradient relative error {err:e} on {n} nodes"));
    }
    Ok(err)
}

pub fn pre_activation(graph: &HeteroGraph, x: &NodeFeatures, params: &GcnParams) -> DenseMatrix {
    let a = graph.adjacency().to_dense();
    a.matmul(&materialise(x))
        .unwrap()
        .matmul(&params.theta0)
        .unwrap()
}

pub fn check_logreg_gradients(rng: &mut RandomSource) -> Result<f64, String> {
    let (n, f, c) = (
        rng.random_range(3..=10),
        rng.random_range(1..=5),
        rng.random_range(2..=4),
    );
    let x = FeatureMatrix::Dense(random_matrix(n, f, 2.0, rng));
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    let lambda = 10f64.powf(rng.random_range(-4.0..0.0));
    let params = LogRegParams {
        weights: random_matrix(f, c, 1.0, rng),
        bias: (0..c).map(|_| rng.random::<f64>() - 0.5).collect(),
        lambda,
    };
    let (_, grads) = logreg_loss_and_grad(&params, &x, &labels).map_err(|e| e.to_string())?;
    let loss = |p: &LogRegParams| logreg_loss_and_grad(p, &x, &labels).unwrap().0;
    let num_w = numeric_gradient(&params.weights, |w| {
        loss(&LogRegParams {
            weights: w.clone(),
            ..params.clone()
        })
    });
    let bias_row = DenseMatrix::from_vec(1, c, params.bias.clone()).unwrap();
    let num_b = numeric_gradient(&bias_row, |b| {
        loss(&LogRegParams {
            bias: b.as_slice().to_vec(),
            ..params.clone()
        })
    });
    let err = max_relative_error(&grads.weights, &num_w).max(max_relative_error(
        &DenseMatrix::from_vec(1, c, grads.bias.clone()).unwrap(),
        &num_b,
    ));
    if err > 1e-5 {
        return Err(format!(
            "logistic regression gradient relative error {err:e}"
        ));
    }
    Ok(err)
}

/// Replaces every label outside `keep` with a shuffled or random value.
pub fn scramble_outside(
    labels: &[usize],
    keep: &[bool],
    classes: usize,
    rng: &mut RandomSource,
) -> Vec<usize> {
    let mut out = labels.to_vec();
    let mut outside: Vec<usize> = (0..labels.len())
        .filter(|&i| !keep[i])
        .map(|i| labels[i])
        .collect();
    outside.shuffle(rng);
    let mut it = outside.into_iter();
    for (i, y) in out.iter_mut().enumerate() {
        if !keep[i] {
            *y = (it.next().unwrap() + rng.random_range(0..classes)) % classes;
        }
    }
    out
}

/// Loss, gradients and training are bitwise unchanged when labels outside
/// the training mask change. The selected snapshot additionally depends on
/// validation labels, so it is compared when labels outside both masks
/// change.
pub fn check_mask_semantics(
    graph: &HeteroGraph,
    labels: &[usize],
    classes: usize,
    train_mask: &[bool],
    val_mask: &[bool],
    config: &TrainConfig,
    rng: &mut RandomSource,
) -> Result<(), String> {
    let x = NodeFeatures::OneHot {
        n_nodes: graph.n_nodes(),
    };
    let outside_train = scramble_outside(labels, train_mask, classes, rng);
    if outside_train == labels {
        return Err("scrambling left every label unchanged".into());
    }
    let params = GcnParams::init(
        x.dim(),
        config.hidden,
        classes,
        &mut RandomSource::new(config.seed),
    );
    let grads_for = |y: &[usize]| {
        let cache = gcn_forward(
            graph,
            &x,
            &params,
            config.dropout,
            &mut RandomSource::new(7),
            true,
        )
        .unwrap();
        let loss = masked_cross_entropy(&cache.probs, y, train_mask).unwrap();
        (
            loss.to_bits(),
            gcn_backward(graph, &x, &params, &cache, y, train_mask).unwrap(),
        )
    };
    let (loss_a, grads_a) = grads_for(labels);
    let (loss_b, grads_b) = grads_for(&outside_train);
    if loss_a != loss_b {
        return Err("loss changed".into());
    }
    if grads_a != grads_b {
        return Err("gradients changed".into());
    }

    let run = |y: &[usize]| train_gcn(graph, &x, y, classes, train_mask, val_mask, config).unwrap();
    let base = run(labels);
    let moved = run(&outside_train);
    let losses = |o: &textgraph::model::GcnTrainOutcome| {
        o.history
            .iter()
            .map(|h| h.train_loss.to_bits())
            .collect::<Vec<_>>()
    };
    if losses(&base) != losses(&moved) {
        return Err("training loss trajectory changed".into());
    }
    if base.last != moved.last {
        return Err("final parameters changed".into());
    }
    let known: Vec<bool> = train_mask
        .iter()
        .zip(val_mask)
        .map(|(&t, &v)| t || v)
        .collect();
    let outside_known = scramble_outside(labels, &known, classes, rng);
    let unseen = run(&outside_known);
    if unseen.best != base.best
        || unseen.best_epoch != base.best_epoch
        || unseen.history != base.history
    {
        return Err("selected model changed when only unseen labels moved".into());
    }
    Ok(())
}
