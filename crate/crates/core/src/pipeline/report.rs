use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::arima::{ArimaFit, ArimaSpec, Candidate};
use crate::metrics::AccuracyReport;
use crate::neuralnet::SweepResult;
use crate::regression::{RegressionFit, Step};
use crate::series::WhitenessReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Trading days inside the window.
    pub days: usize,
    /// Feature rows whose target date falls inside the window.
    pub feature_rows: usize,
}

impl Window {
    pub fn new(start: NaiveDate, end: NaiveDate, days: usize, feature_rows: usize) -> Self {
        Self {
            start,
            end,
            days,
            feature_rows,
        }
    }
}

/// Test-window accuracy (`100 - MAPE`) of each stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageAccuracy {
    pub arima_gold: f64,
    pub full_ols: f64,
    pub forward_stepwise: f64,
    pub backward_stepwise: f64,
    pub hybrid_nn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetArima {
    pub asset: String,
    pub order: String,
    pub spec: ArimaSpec,
    pub mu: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma2: f64,
    pub aic: f64,
    pub sic: f64,
    pub whiteness: Option<WhitenessReport>,
    pub candidates: Vec<Candidate>,
    pub test_mape: f64,
    pub test_accuracy: f64,
}

impl AssetArima {
    pub(super) fn new(
        asset: &str,
        fit: &ArimaFit,
        candidates: &[Candidate],
        test: &AccuracyReport,
        whiteness_lags: usize,
    ) -> Self {
        Self {
            asset: asset.to_string(),
            order: fit.spec.to_string(),
            spec: fit.spec,
            mu: fit.mu,
            phi: fit.phi.clone(),
            theta: fit.theta.clone(),
            sigma2: fit.sigma2,
            aic: fit.aic,
            sic: fit.sic,
            whiteness: fit.whiteness(whiteness_lags).ok(),
            candidates: candidates.to_vec(),
            test_mape: test.mape,
            test_accuracy: test.accuracy,
        }
    }

    /// Rebuilds a fit usable for forecasting (residuals are not kept).
    pub fn to_fit(&self) -> ArimaFit {
        ArimaFit {
            spec: self.spec,
            mu: self.mu,
            phi: self.phi.clone(),
            theta: self.theta.clone(),
            residuals: Vec::new(),
            sigma2: self.sigma2,
            css: f64::NAN,
            aic: self.aic,
            sic: self.sic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionStage {
    pub name: String,
    pub equation: String,
    pub fit: RegressionFit,
    /// Stepwise trace; absent for the full model.
    pub steps: Option<Vec<Step>>,
    pub test_mape: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub hidden: usize,
    pub train_mape: Option<f64>,
    pub validation_mape: Option<f64>,
    pub epochs_run: Option<usize>,
    pub early_stopped: Option<bool>,
    pub final_loss: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnStage {
    pub inputs: Vec<String>,
    pub best_hidden: usize,
    pub sweep: Vec<SweepSummary>,
    pub test_mape: f64,
    pub test_accuracy: f64,
}

impl NnStage {
    pub(super) fn new(inputs: Vec<String>, sweep: &SweepResult, test: &AccuracyReport) -> Self {
        let entries = sweep
            .entries
            .iter()
            .map(|e| {
                let r = e.report.as_ref();
                SweepSummary {
                    hidden: e.hidden,
                    train_mape: r.map(|r| r.train_mape),
                    validation_mape: r.and_then(|r| r.validation_mape),
                    epochs_run: r.map(|r| r.epochs_run),
                    early_stopped: r.map(|r| r.early_stopped),
                    final_loss: r.and_then(|r| r.epoch_losses.last().copied()),
                    error: e.error.clone(),
                }
            })
            .collect();
        Self {
            inputs,
            best_hidden: sweep.best_hidden,
            sweep: entries,
            test_mape: test.mape,
            test_accuracy: test.accuracy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything `report.json` holds. Wall-clock timings are kept out of the
/// serialized form so equal inputs give byte-identical reports; they go to
/// `timings.json` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub train: Window,
    pub test: Window,
    pub accuracy: StageAccuracy,
    pub arima: Vec<AssetArima>,
    /// Columns removed because they are exact linear combinations of others.
    pub dropped_columns: Vec<String>,
    pub regression: Vec<RegressionStage>,
    pub nn: NnStage,
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}
