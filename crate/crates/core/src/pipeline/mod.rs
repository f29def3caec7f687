//! End-to-end run: ingest, per-asset ARIMA, indicators, regression stages
//! and the network, all scored on one test window.
//!
//! Artifacts are written as each stage finishes, so a failed run leaves
//! whatever was produced before the failure in the output directory.

mod config;
mod report;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use config::{DiffOrder, PipelineConfig};
pub use report::{
    AssetArima, NnStage, PipelineReport, RegressionStage, StageAccuracy, StageTiming, SweepSummary,
    Window,
};

use crate::arima::{self, ArimaFit};
use crate::indicators::IndicatorSet;
use crate::ingest::{self, PriceFrame};
use crate::metrics::AccuracyReport;
use crate::neuralnet::{self, MlpModel};
use crate::regression::{self, Direction, FeatureMatrix, StepwiseTrace};
use crate::series;

pub const ASSETS: [&str; 3] = ["gold", "oil", "eurusd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Ingest,
    Arima,
    Indicators,
    Features,
    Regression,
    NeuralNet,
    Output,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Arima => "arima",
            Stage::Indicators => "indicators",
            Stage::Features => "features",
            Stage::Regression => "regression",
            Stage::NeuralNet => "neuralnet",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("[{stage}] {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, message: impl Into<String>) -> Self {
        Self {
            stage,
            message: message.into(),
        }
    }
}

trait Tag<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: std::fmt::Display> Tag<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::new(stage, e.to_string()))
    }
}

/// Everything a run computed, for callers that need more than the report.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: PipelineReport,
    /// Aligned frames restricted to `[train_start, test_end]`, in [`ASSETS`] order.
    pub frames: Vec<PriceFrame>,
    pub fits: Vec<ArimaFit>,
    /// One-step forecast paths over each full frame, in [`ASSETS`] order.
    pub paths: Vec<Vec<Option<f64>>>,
    pub indicators: IndicatorSet,
    /// Feature rows with training-window targets, aliased columns removed.
    pub train: FeatureMatrix,
    /// Feature rows with test-window targets, same columns as `train`.
    pub test: FeatureMatrix,
    pub model: MlpModel,
}

/// Runs the pipeline and returns its report.
pub fn run(config: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    run_detailed(config).map(|r| r.report)
}

struct Clock(Vec<StageTiming>, Instant);

impl Clock {
    fn new() -> Self {
        Self(Vec::new(), Instant::now())
    }

    fn lap(&mut self, stage: &str) {
        self.0.push(StageTiming {
            stage: stage.to_string(),
            seconds: self.1.elapsed().as_secs_f64(),
        });
        self.1 = Instant::now();
    }
}

struct Out(PathBuf);

impl Out {
    fn create(dir: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| PipelineError::new(Stage::Output, format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self(dir.to_path_buf()))
    }

    fn file(&self, name: &str) -> Result<BufWriter<File>, PipelineError> {
        let path = self.0.join(name);
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| PipelineError::new(Stage::Output, format!("cannot write {}: {e}", path.display())))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(value).at(Stage::Output)?;
        text.push('\n');
        std::fs::write(self.0.join(name), text).at(Stage::Output)
    }

    fn predictions(&self, name: &str, r: &AccuracyReport) -> Result<(), PipelineError> {
        r.write_csv(self.file(&format!("predictions_{name}.csv"))?)
            .at(Stage::Output)
    }
}

fn test_report(
    frame: &PriceFrame,
    path: &[Option<f64>],
    split: &ingest::SplitSpec,
) -> Result<AccuracyReport, PipelineError> {
    let mut dates = Vec::new();
    let mut actual = Vec::new();
    let mut predicted = Vec::new();
    for (bar, p) in frame.bars().iter().zip(path) {
        if split.in_test(bar.date) {
            let p = p.ok_or_else(|| {
                PipelineError::new(Stage::Arima, format!("{}: no forecast for {}", frame.asset(), bar.date))
            })?;
            dates.push(bar.date);
            actual.push(bar.close);
            predicted.push(p);
        }
    }
    AccuracyReport::new(dates, actual, predicted).at(Stage::Arima)
}

fn write_correlogram(out: &Out, asset: &str, w: &[f64], lags: usize) -> Result<(), PipelineError> {
    let lags = lags.min(w.len().saturating_sub(1)).max(1);
    let acf = series::acf(w, lags).at(Stage::Arima)?;
    let pacf = series::pacf(w, lags).at(Stage::Arima)?;
    let mut csv = csv::Writer::from_writer(out.file(&format!("correlogram_{asset}.csv"))?);
    csv.write_record(["lag", "acf", "pacf", "band"]).at(Stage::Output)?;
    for (i, lag) in acf.lags.iter().enumerate() {
        csv.write_record([
            lag.to_string(),
            acf.coefficients[i].to_string(),
            pacf.coefficients[i].to_string(),
            acf.band.to_string(),
        ])
        .at(Stage::Output)?;
    }
    csv.flush().at(Stage::Output)
}

struct AssetResult {
    fit: ArimaFit,
    search: Vec<arima::Candidate>,
    path: Vec<Option<f64>>,
    test: AccuracyReport,
    differenced: Vec<f64>,
}

fn model_asset(
    config: &PipelineConfig,
    asset: &str,
    frame: &PriceFrame,
) -> Result<AssetResult, PipelineError> {
    let tag = |e: String| PipelineError::new(Stage::Arima, format!("{asset}: {e}"));
    let split = config.split();
    let (train, _) = ingest::split(frame, &split).map_err(|e| tag(e.to_string()))?;
    let closes = train.closes();
    let d = match config.arima_d {
        DiffOrder::Fixed(d) => d,
        DiffOrder::Auto => series::suggest_d(&closes, config.stationarity_threshold).map_err(|e| tag(e.to_string()))?,
    };
    let search = arima::search_orders(
        &closes,
        d,
        config.arima_max_p,
        config.arima_max_q,
        config.arima_criterion,
        &config.fit_options(),
    )
    .map_err(|e| tag(e.to_string()))?;
    let path = arima::one_step_path(&search.best, &frame.closes()).map_err(|e| tag(e.to_string()))?;
    let test = test_report(frame, &path, &split)?;
    let differenced = series::difference(&closes, d).map_err(|e| tag(e.to_string()))?;
    Ok(AssetResult {
        fit: search.best,
        search: search.candidates,
        path,
        test,
        differenced,
    })
}

fn regression_stage(
    name: &str,
    fit: regression::RegressionFit,
    trace: Option<&StepwiseTrace>,
    test: &FeatureMatrix,
) -> Result<(RegressionStage, AccuracyReport), PipelineError> {
    let eval = regression::evaluate(&fit, test).at(Stage::Regression)?;
    let stage = RegressionStage {
        name: name.to_string(),
        equation: fit.equation(),
        steps: trace.map(|t| t.steps.clone()),
        test_mape: eval.mape,
        test_accuracy: eval.accuracy,
        fit,
    };
    Ok((stage, eval))
}

/// Runs every stage and keeps the intermediate results.
pub fn run_detailed(config: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    config.validate()?;
    let split = config.split();
    let out = Out::create(&config.out)?;
    let mut clock = Clock::new();

    // ingest
    let raw = [&config.gold, &config.oil, &config.eurusd]
        .iter()
        .map(ingest::parse_csv_auto)
        .collect::<Result<Vec<_>, _>>()
        .at(Stage::Ingest)?;
    let aligned = ingest::align_calendars(&raw).at(Stage::Ingest)?;
    let frames: Vec<PriceFrame> = aligned
        .iter()
        .zip(ASSETS)
        .map(|(f, name)| {
            f.slice_dates(split.train_start, split.test_end)
                .ok_or_else(|| PipelineError::new(Stage::Ingest, format!("{name}: no bars inside the split")))
        })
        .collect::<Result<_, _>>()?;
    for (f, name) in frames.iter().zip(ASSETS) {
        ingest::split(f, &split).map_err(|e| PipelineError::new(Stage::Ingest, format!("{name}: {e}")))?;
    }
    let train_days = frames[0].dates().into_iter().filter(|d| split.in_train(*d)).count();
    let test_dates: Vec<NaiveDate> = frames[0].dates().into_iter().filter(|d| split.in_test(*d)).collect();
    clock.lap("ingest");

    // arima, one asset per task
    let results: Vec<AssetResult> = ASSETS
        .par_iter()
        .zip(frames.par_iter())
        .map(|(name, frame)| model_asset(config, name, frame))
        .collect::<Result<_, _>>()?;
    let mut arima_reports = Vec::with_capacity(3);
    for (name, r) in ASSETS.iter().zip(&results) {
        write_correlogram(&out, name, &r.differenced, config.correlogram_lags)?;
        out.predictions(&format!("arima_{name}"), &r.test)?;
        arima_reports.push(AssetArima::new(name, &r.fit, &r.search, &r.test, config.whiteness_lags));
    }
    clock.lap("arima");

    // indicators and features
    let gold = &frames[0];
    let indicators = IndicatorSet::compute(gold, &config.indicator_params()).at(Stage::Indicators)?;
    indicators
        .write_csv(out.file("indicators_gold.csv")?)
        .at(Stage::Output)?;
    clock.lap("indicators");

    let all = regression::build_features(gold, &indicators, &results[2].path, &results[1].path).at(Stage::Features)?;
    let train_all = all
        .filter_dates(|d| split.in_train(d))
        .ok_or_else(|| PipelineError::new(Stage::Features, "no feature rows in the training window"))?;
    let (train, dropped) = train_all.drop_aliased().at(Stage::Features)?;
    let test = all
        .filter_dates(|d| split.in_test(d))
        .ok_or_else(|| PipelineError::new(Stage::Features, "no feature rows in the test window"))?
        .select(train.names())
        .at(Stage::Features)?;
    if test.dates() != test_dates.as_slice() {
        return Err(PipelineError::new(
            Stage::Features,
            format!(
                "feature rows cover {} of {} test days; the warm-up reaches into the test window",
                test.n_rows(),
                test_dates.len()
            ),
        ));
    }
    train.write_csv(out.file("features_train.csv")?).at(Stage::Output)?;
    test.write_csv(out.file("features_test.csv")?).at(Stage::Output)?;
    clock.lap("features");

    // regression
    let crit = config.stepwise_criterion;
    let full_fit = regression::ols(&train, train.names()).at(Stage::Regression)?;
    let forward = regression::stepwise(&train, Direction::Forward, crit).at(Stage::Regression)?;
    let backward = regression::stepwise(&train, Direction::Backward, crit).at(Stage::Regression)?;
    let (full_stage, full_eval) = regression_stage("full", full_fit, None, &test)?;
    let (fwd_stage, fwd_eval) = regression_stage("forward", forward.final_fit.clone(), Some(&forward), &test)?;
    let (bwd_stage, bwd_eval) = regression_stage("backward", backward.final_fit.clone(), Some(&backward), &test)?;
    out.predictions("full_ols", &full_eval)?;
    out.predictions("forward_stepwise", &fwd_eval)?;
    out.predictions("backward_stepwise", &bwd_eval)?;
    clock.lap("regression");

    // network on the chosen stepwise subset
    let subset = match config.nn_subset {
        Direction::Forward => &forward.final_fit.included,
        Direction::Backward => &backward.final_fit.included,
    };
    if subset.is_empty() {
        return Err(PipelineError::new(
            Stage::NeuralNet,
            "stepwise selected no columns; the network needs at least one input",
        ));
    }
    let nn_train = train.select(subset).at(Stage::NeuralNet)?;
    let nn_test = test.select(subset).at(Stage::NeuralNet)?;
    let sweep = neuralnet::sweep(&nn_train, &config.train_config()).at(Stage::NeuralNet)?;
    let nn_eval = sweep.model.evaluate(&nn_test).at(Stage::NeuralNet)?;
    out.predictions("hybrid_nn", &nn_eval)?;
    sweep.model.save(out.0.join("model_nn.json")).at(Stage::Output)?;
    let nn_stage = NnStage::new(subset.clone(), &sweep, &nn_eval);
    clock.lap("neuralnet");

    write_plot_data(&out, &results[0].test, &bwd_eval, &nn_eval)?;

    let report = PipelineReport {
        seed: config.seed,
        train: Window::new(split.train_start, split.train_end, train_days, train.n_rows()),
        test: Window::new(split.test_start, split.test_end, test_dates.len(), test.n_rows()),
        accuracy: StageAccuracy {
            arima_gold: results[0].test.accuracy,
            full_ols: full_stage.test_accuracy,
            forward_stepwise: fwd_stage.test_accuracy,
            backward_stepwise: bwd_stage.test_accuracy,
            hybrid_nn: nn_stage.test_accuracy,
        },
        arima: arima_reports,
        dropped_columns: dropped,
        regression: vec![full_stage, fwd_stage, bwd_stage],
        nn: nn_stage,
        timings: Vec::new(),
    };
    out.json("report.json", &report)?;
    clock.lap("report");
    out.json("timings.json", &clock.0)?;
    let report = PipelineReport {
        timings: clock.0,
        ..report
    };

    Ok(PipelineRun {
        report,
        paths: results.iter().map(|r| r.path.clone()).collect(),
        fits: results.into_iter().map(|r| r.fit).collect(),
        frames,
        indicators,
        train,
        test,
        model: sweep.model,
    })
}

/// `date,actual,arima,regression,hybrid` over the test window; the
/// regression column is the backward stepwise model.
fn write_plot_data(
    out: &Out,
    arima: &AccuracyReport,
    regression: &AccuracyReport,
    hybrid: &AccuracyReport,
) -> Result<(), PipelineError> {
    if arima.dates != regression.dates || arima.dates != hybrid.dates {
        return Err(PipelineError::new(Stage::Output, "stage predictions cover different dates"));
    }
    let mut w = csv::Writer::from_writer(out.file("plot_data.csv")?);
    w.write_record(["date", "actual", "arima", "regression", "hybrid"])
        .at(Stage::Output)?;
    for i in 0..arima.dates.len() {
        w.write_record([
            arima.dates[i].format("%Y-%m-%d").to_string(),
            arima.actual[i].to_string(),
            arima.predicted[i].to_string(),
            regression.predicted[i].to_string(),
            hybrid.predicted[i].to_string(),
        ])
        .at(Stage::Output)?;
    }
    w.flush().at(Stage::Output)
}
