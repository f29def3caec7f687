use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use hybridcast::arima;
use hybridcast::fixture::{self, DEFAULT_SEED};
use hybridcast::indicators::IndicatorSet;
use hybridcast::ingest::PriceFrame;
use hybridcast::pipeline::{self, PipelineConfig, PipelineRun, Stage};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

fn out_dir() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("bundled_run")
}

/// One detailed run on the bundled data, shared by the tests below.
fn bundled() -> &'static PipelineRun {
    static RUN: OnceLock<PipelineRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut cfg = PipelineConfig::load(data_dir().join("pipeline.toml")).unwrap();
        cfg.out = out_dir();
        pipeline::run_detailed(&cfg).unwrap()
    })
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn bundled_files_match_the_generator() {
    let dir = tempfile::tempdir().unwrap();
    fixture::synthetic_market(DEFAULT_SEED).save(dir.path()).unwrap();
    for name in ["gold.csv", "oil.csv", "eurusd.csv"] {
        let fresh = std::fs::read(dir.path().join(name)).unwrap();
        let shipped = std::fs::read(data_dir().join(name)).unwrap();
        assert!(fresh == shipped, "{name} differs from synthetic_market({DEFAULT_SEED})");
    }
    let shipped = std::fs::read_to_string(data_dir().join("pipeline.toml")).unwrap();
    assert_eq!(
        PipelineConfig::from_toml(&shipped).unwrap(),
        fixture::pipeline_config(DEFAULT_SEED)
    );
}

#[test]
fn writes_every_artifact() {
    bundled();
    let mut expected = vec![
        "report.json".to_string(),
        "timings.json".into(),
        "indicators_gold.csv".into(),
        "features_train.csv".into(),
        "features_test.csv".into(),
        "model_nn.json".into(),
        "plot_data.csv".into(),
    ];
    for asset in pipeline::ASSETS {
        expected.push(format!("correlogram_{asset}.csv"));
        expected.push(format!("predictions_arima_{asset}.csv"));
    }
    for stage in ["full_ols", "forward_stepwise", "backward_stepwise", "hybrid_nn"] {
        expected.push(format!("predictions_{stage}.csv"));
    }
    for name in expected {
        assert!(out_dir().join(&name).is_file(), "missing {name}");
    }
}

/// Rebuilds one test row using only bars up to and including the day the
/// forecast is made, and checks it against the row the pipeline used.
#[test]
fn features_use_only_past_information() {
    let run = bundled();
    let gold = &run.frames[0];
    let dates = gold.dates();
    for row in [0, 57, run.test.n_rows() - 1] {
        let target_date = run.test.dates()[row];
        let t = dates.iter().position(|d| *d == target_date).unwrap() - 1;
        let cut = |f: &PriceFrame| PriceFrame::new(f.asset(), f.bars()[..=t].to_vec()).unwrap();
        let gold_cut = cut(gold);
        let ind = IndicatorSet::compute(&gold_cut, &run.indicators.params).unwrap();
        let next = |i: usize| {
            let closes = cut(&run.frames[i]).closes();
            arima::forecast(&run.fits[i], &closes, 1).unwrap().point[0]
        };
        let expected: HashMap<&str, f64> = HashMap::from([
            ("x1", gold_cut.opens()[t]),
            ("x2", next(2)),
            ("x3", next(1)),
            ("x4", ind.rsi[t].unwrap()),
            ("x5", ind.stoch_k[t].unwrap()),
            ("x6", ind.stoch_d[t].unwrap()),
            ("x7", ind.williams_r[t].unwrap()),
            ("x8", ind.ema[0][t]),
            ("x9", ind.ema[1][t]),
        ]);
        let values = run.test.row(row);
        for (name, got) in run.test.names().iter().zip(values) {
            let want = expected[name.as_str()];
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "{name} on {target_date}: pipeline {got}, truncated {want}"
            );
        }
        assert_eq!(run.test.target()[row], gold.closes()[t + 1]);
    }
}

#[test]
fn report_accuracies_match_prediction_files() {
    let run = bundled();
    let acc = &run.report.accuracy;
    let stages = [
        ("arima_gold", acc.arima_gold),
        ("full_ols", acc.full_ols),
        ("forward_stepwise", acc.forward_stepwise),
        ("backward_stepwise", acc.backward_stepwise),
        ("hybrid_nn", acc.hybrid_nn),
    ];
    for (name, reported) in stages {
        let (header, rows) = read_csv(&out_dir().join(format!("predictions_{name}.csv")));
        assert_eq!(header, ["date", "actual", "predicted"]);
        assert_eq!(rows.len(), run.report.test.days, "{name}");
        let ape: f64 = rows
            .iter()
            .map(|r| {
                let a: f64 = r[1].parse().unwrap();
                let p: f64 = r[2].parse().unwrap();
                ((a - p) / a).abs()
            })
            .sum();
        let recomputed = 100.0 - 100.0 * ape / rows.len() as f64;
        assert!((recomputed - reported).abs() < 1e-9, "{name}: {recomputed} vs {reported}");
    }
}

#[test]
fn plot_data_covers_the_test_window_with_exact_actuals() {
    let run = bundled();
    let (header, rows) = read_csv(&out_dir().join("plot_data.csv"));
    assert_eq!(header, ["date", "actual", "arima", "regression", "hybrid"]);
    assert_eq!(rows.len(), run.report.test.days);
    let gold = &run.frames[0];
    let closes: HashMap<String, f64> = gold
        .dates()
        .iter()
        .zip(gold.closes())
        .map(|(d, c)| (d.to_string(), c))
        .collect();
    for r in &rows {
        assert_eq!(r[1].parse::<f64>().unwrap(), closes[&r[0]], "{}", r[0]);
    }
}

#[test]
fn report_round_trips_and_omits_timings() {
    bundled();
    let text = std::fs::read_to_string(out_dir().join("report.json")).unwrap();
    assert!(!text.contains("seconds"));
    let parsed: pipeline::PipelineReport = serde_json::from_str(&text).unwrap();
    let mut expected = bundled().report.clone();
    expected.timings.clear();
    assert_eq!(parsed, expected);
    let timings: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir().join("timings.json")).unwrap()).unwrap();
    assert!(timings.as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn saved_model_reproduces_test_predictions() {
    let run = bundled();
    let model = hybridcast::MlpModel::load(out_dir().join("model_nn.json")).unwrap();
    let subset = run.test.select(&run.report.nn.inputs).unwrap();
    let eval = model.evaluate(&subset).unwrap();
    assert_eq!(eval.accuracy, run.report.accuracy.hybrid_nn);
}

fn config_in(dir: &Path) -> PipelineConfig {
    fixture::synthetic_market(5).save(dir).unwrap();
    let mut cfg = fixture::pipeline_config(5);
    cfg.resolve_relative_to(dir);
    cfg
}

#[test]
fn errors_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path());

    let mut missing = cfg.clone();
    missing.oil = dir.path().join("nope.csv");
    assert_eq!(pipeline::run(&missing).unwrap_err().stage, Stage::Config);

    let mut bad_split = cfg.clone();
    bad_split.test_start = bad_split.train_start;
    assert_eq!(pipeline::run(&bad_split).unwrap_err().stage, Stage::Config);

    let garbled = dir.path().join("garbled.csv");
    let mut text = std::fs::read_to_string(&cfg.gold).unwrap();
    text.push_str("2019-01-02,abc,1,1,1\n");
    std::fs::write(&garbled, text).unwrap();
    let mut bad_rows = cfg.clone();
    bad_rows.gold = garbled;
    let e = pipeline::run(&bad_rows).unwrap_err();
    assert_eq!(e.stage, Stage::Ingest);
    assert!(e.to_string().starts_with("[ingest]"), "{e}");

    let mut late = cfg.clone();
    late.train_start = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    late.train_end = chrono::NaiveDate::from_ymd_opt(2020, 6, 1).unwrap();
    late.test_start = chrono::NaiveDate::from_ymd_opt(2020, 6, 2).unwrap();
    late.test_end = chrono::NaiveDate::from_ymd_opt(2020, 12, 31).unwrap();
    assert_eq!(pipeline::run(&late).unwrap_err().stage, Stage::Ingest);
}

#[test]
fn forward_subset_can_feed_the_network() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config_in(dir.path());
    cfg.nn_subset = hybridcast::Direction::Forward;
    cfg.nn_epochs = 50;
    cfg.out = dir.path().join("out");
    let r = pipeline::run(&cfg).unwrap();
    let fwd = r.regression.iter().find(|s| s.name == "forward").unwrap();
    assert_eq!(r.nn.inputs, fwd.fit.included);
}
