use std::path::Path;
use std::process::{Command, Output};

fn hybridcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridcast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hybridcast(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path) {
    ok(&["synth", "--seed", "7", "--out", s(dir)]);
}

#[test]
fn synth_then_pipeline_run() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    for f in ["gold.csv", "oil.csv", "eurusd.csv", "pipeline.toml"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let out = dir.path().join("run");
    let stdout = ok(&[
        "pipeline",
        "run",
        "--config",
        s(&dir.path().join("pipeline.toml")),
        "--out",
        s(&out),
    ]);
    assert!(stdout.contains("hybrid nn"), "{stdout}");
    assert!(out.join("report.json").is_file());
    assert!(out.join("plot_data.csv").is_file());
}

#[test]
fn diagnose_writes_correlogram_csv() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let csv = ok(&["diagnose", "--input", s(&dir.path().join("oil.csv")), "--lags", "5"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "lag,acf,pacf,band");
    assert_eq!(lines.len(), 6);
}

#[test]
fn fit_arima_forecasts_the_tail() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = dir.path().join("fc.csv");
    ok(&[
        "fit-arima",
        "--input",
        s(&dir.path().join("eurusd.csv")),
        "--max-p",
        "1",
        "--max-q",
        "1",
        "--train-end",
        "2018-01-01",
        "--output",
        s(&out),
    ]);
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("date,actual,predicted"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("2018-01-02,"), "{first}");
    assert_eq!(lines.count() + 1, 261);
}

#[test]
fn indicators_csv_has_all_columns() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let csv = ok(&["indicators", "--input", s(&dir.path().join("gold.csv"))]);
    let header = csv.lines().next().unwrap();
    for col in ["date", "ema5", "ema10", "rsi14", "stoch_k", "stoch_d", "williams_r"] {
        assert!(header.split(',').any(|h| h == col), "{col} not in {header}");
    }
}

#[test]
fn stepwise_and_train_nn_on_pipeline_features() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = dir.path().join("run");
    ok(&[
        "pipeline",
        "run",
        "--config",
        s(&dir.path().join("pipeline.toml")),
        "--out",
        s(&out),
    ]);
    let features = out.join("features_train.csv");
    let json = dir.path().join("fit.json");
    let trace = ok(&[
        "stepwise",
        "--input",
        s(&features),
        "--direction",
        "forward",
        "--json",
        s(&json),
    ]);
    assert!(trace.contains("y = "), "{trace}");
    let fit: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let included: Vec<String> = fit["final_fit"]["included"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(!included.is_empty());

    let model = dir.path().join("nn.json");
    let preds = ok(&[
        "train-nn",
        "--input",
        s(&features),
        "--test",
        s(&out.join("features_test.csv")),
        "--columns",
        &included.join(","),
        "--hidden",
        "3",
        "--epochs",
        "30",
        "--model",
        s(&model),
    ]);
    assert!(preds.starts_with("date,actual,predicted"));
    assert!(model.is_file());
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let out = hybridcast(&["diagnose", "--input", "/nonexistent/gold.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "gold = \"missing.csv\"\n").unwrap();
    let out = hybridcast(&["pipeline", "run", "--config", s(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[config]"));

    let out = hybridcast(&["train-nn", "--input", s(&cfg), "--hidden", "11"]);
    assert!(!out.status.success());
}
