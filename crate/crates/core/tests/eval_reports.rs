use proptest::prelude::*;
use textgraph::corpus::split_corpus;
use textgraph::eval::{
    compute_metrics, emit_report, load_reports, mean_std, Experiment, ExperimentConfig, MaskPolicy,
    ModelKind,
};
use textgraph::model::TrainConfig;
use textgraph::synthetic::{topic_corpus, TopicCorpusSpec};

fn brute_force_f1(pred: &[usize], gold: &[usize], c: usize) -> Vec<f64> {
    (0..c)
        .map(|k| {
            let tp = pred
                .iter()
                .zip(gold)
                .filter(|&(&p, &g)| p == k && g == k)
                .count() as f64;
            let fp = pred
                .iter()
                .zip(gold)
                .filter(|&(&p, &g)| p == k && g != k)
                .count() as f64;
            let fn_ = pred
                .iter()
                .zip(gold)
                .filter(|&(&p, &g)| p != k && g == k)
                .count() as f64;
            let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            }
        })
        .collect()
}

fn labels(c: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..=50).prop_flat_map(move |n| {
        (
            proptest::collection::vec(0..c, n),
            proptest::collection::vec(0..c, n),
        )
    })
}

proptest! {
    #[test]
    fn metrics_match_precision_recall_oracle((c, (pred, gold)) in (2usize..=6).prop_flat_map(|c| (Just(c), labels(c)))) {
        let m = compute_metrics(&pred, &gold, c).unwrap();
        let want = brute_force_f1(&pred, &gold, c);
        for (a, b) in m.per_class_f1.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-15, "{} vs {}", a, b);
        }
        prop_assert!((m.macro_f1 - want.iter().sum::<f64>() / c as f64).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&m.accuracy) && (0.0..=1.0).contains(&m.macro_f1));
        prop_assert_eq!(m.confusion.iter().flatten().sum::<u64>(), pred.len() as u64);
        let correct = pred.iter().zip(&gold).filter(|(p, g)| p == g).count();
        prop_assert_eq!(m.accuracy, correct as f64 / pred.len() as f64);
    }

    #[test]
    fn diagonal_confusion_gives_equal_scores(gold in proptest::collection::vec(0usize..4, 4..40)) {
        let mut gold = gold;
        gold[..4].copy_from_slice(&[0, 1, 2, 3]);
        let m = compute_metrics(&gold, &gold, 4).unwrap();
        prop_assert_eq!(m.macro_f1, m.accuracy);
    }

    #[test]
    fn population_std_formula(values in proptest::collection::vec(0.0f64..1.0, 1..8)) {
        let (mean, std) = mean_std(&values);
        let n = values.len() as f64;
        let direct = (values.iter().map(|v| v * v).sum::<f64>() / n - mean * mean).max(0.0).sqrt();
        prop_assert!((std - direct).abs() < 1e-7);
    }
}

fn quick(model: ModelKind) -> ExperimentConfig {
    ExperimentConfig {
        window: Some(5),
        train: TrainConfig {
            epochs: 30,
            hidden: 32,
            ..TrainConfig::default()
        },
        ..ExperimentConfig::new(model)
    }
}

#[test]
fn deterministic_baselines_have_zero_spread() {
    let corpus = topic_corpus(&TopicCorpusSpec::new(120, 3)).unwrap();
    let split = split_corpus(&corpus, (8, 1, 1), 0).unwrap();
    let mut e = Experiment::new(&corpus, &split).unwrap();
    for model in [ModelKind::Tfidf, ModelKind::Counts] {
        let r = e.run_seeded(&quick(model), &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(r.seeds, vec![0, 1, 2, 3, 4]);
        assert_eq!((r.accuracy.std, r.macro_f1.std), (0.0, 0.0), "{model}");
    }
}

#[test]
fn single_seed_has_zero_spread() {
    let corpus = topic_corpus(&TopicCorpusSpec::new(60, 2)).unwrap();
    let split = split_corpus(&corpus, (8, 1, 1), 0).unwrap();
    let r = Experiment::new(&corpus, &split)
        .unwrap()
        .run_seeded(&quick(ModelKind::TextGcn), &[3])
        .unwrap();
    assert_eq!(r.macro_f1.std, 0.0);
    assert_eq!(r.runs.len(), 1);
}

#[test]
fn reports_round_trip_and_have_expected_shape() {
    let corpus = topic_corpus(&TopicCorpusSpec {
        seed: 3,
        ..TopicCorpusSpec::new(100, 2)
    })
    .unwrap();
    let split = split_corpus(&corpus, (8, 1, 1), 0).unwrap();
    let mut e = Experiment::new(&corpus, &split).unwrap();
    let seeds = [0, 1];
    let models = [ModelKind::TextGcn, ModelKind::Tfidf];
    let proportions = [0.2, 0.05, 1.0];
    let labels = e
        .sweep_label_proportion(&proportions, &models, &quick(ModelKind::TextGcn), &seeds)
        .unwrap();
    assert_eq!(labels.points.len(), proportions.len() * models.len());
    let full = labels.points.iter().find(|p| p.x == 1.0).unwrap();
    assert_eq!(
        full.report.runs[0].labelled,
        split.count(textgraph::corpus::Split::Train)
    );
    let windows = e
        .sweep_window_size(&[Some(3), None], &quick(ModelKind::TextGcn), &seeds)
        .unwrap();
    assert_eq!(windows.points.len(), 2);

    let dir = tempfile::tempdir().unwrap();
    let standalone = e.run_seeded(&quick(ModelKind::Counts), &seeds).unwrap();
    emit_report(
        dir.path(),
        std::slice::from_ref(&standalone),
        &[labels.clone(), windows],
    )
    .unwrap();
    let back = load_reports(&dir.path().join("metrics.json")).unwrap();
    assert_eq!(back.len(), 1 + 6 + 2);
    assert_eq!(back[0], standalone);
    assert_eq!(back[1], labels.points[0].report);

    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + back.len() * 2);
    for name in ["labels", "window"] {
        let text =
            std::fs::read_to_string(dir.path().join(format!("plotdata_{name}.csv"))).unwrap();
        let xs: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert!(xs.windows(2).all(|w| w[0] <= w[1]), "{name}: {xs:?}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    for key in [
        "model",
        "seeds",
        "accuracy",
        "macro_f1",
        "per_class_f1",
        "runtime_s",
        "peak_mem_bytes",
        "config",
    ] {
        assert!(json[0].get(key).is_some(), "missing {key}");
    }
    assert!(json[0]["accuracy"].get("per_seed").is_some());
}

#[test]
fn label_trend_on_separable_corpus() {
    let corpus = topic_corpus(&TopicCorpusSpec {
        seed: 9,
        ..TopicCorpusSpec::new(200, 2)
    })
    .unwrap();
    let split = split_corpus(&corpus, (8, 1, 1), 0).unwrap();
    let mut e = Experiment::new(&corpus, &split).unwrap();
    let sweep = e
        .sweep_label_proportion(
            &[0.01, 0.2],
            &[ModelKind::TextGcn],
            &quick(ModelKind::TextGcn),
            &[0, 1, 2],
        )
        .unwrap();
    let (low, high) = (
        sweep.points[0].report.macro_f1.mean,
        sweep.points[1].report.macro_f1.mean,
    );
    assert!(high >= low - 0.02, "{high} vs {low}");
}

#[test]
fn invalid_settings_are_rejected() {
    let corpus = topic_corpus(&TopicCorpusSpec::new(40, 2)).unwrap();
    let split = split_corpus(&corpus, (8, 1, 1), 0).unwrap();
    let mut e = Experiment::new(&corpus, &split).unwrap();
    assert!(e.run_seeded(&quick(ModelKind::Tfidf), &[]).is_err());
    assert!(e
        .sweep_label_proportion(&[0.0], &[ModelKind::Tfidf], &quick(ModelKind::Tfidf), &[0])
        .is_err());
    assert!(e
        .sweep_window_size(&[], &quick(ModelKind::TextGcn), &[0])
        .is_err());
    // 32 training documents at 1% rounds to zero labelled documents.
    let tiny = ExperimentConfig {
        label_proportion: 0.01,
        mask: MaskPolicy::PerSeed,
        ..quick(ModelKind::Tfidf)
    };
    assert!(e.run_seeded(&tiny, &[0]).is_err());
    assert!(e.run_seeded(&quick(ModelKind::AvgEmbed), &[0]).is_err());
}
