//! One-hidden-layer ReLU regressor trained by mini-batch gradient descent
//! on min-max scaled data, plus the 1..=10 hidden-size sweep.
//!
//! The objective is MSE in scaled space. MAPE, always in price space, is
//! used for reporting and for choosing the hidden size on a chronological
//! validation tail.

mod mlp;
mod scaler;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mlp::{Activation, MlpModel};
pub use scaler::Scaler;

use crate::metrics::{self, MetricsError};
use crate::regression::FeatureMatrix;
use crate::sim;

pub const MAX_HIDDEN: usize = 10;
pub const MIN_ROWS: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("column {0} is constant on the training rows")]
    ConstantColumn(usize),
    #[error("input has {got} values, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("column schema mismatch: model expects {expected:?}, got {got:?}")]
    SchemaMismatch { expected: Vec<String>, got: Vec<String> },
    #[error("hidden size {0} outside 1..=10")]
    BadHidden(usize),
    #[error("need at least {needed} rows, got {got}")]
    InsufficientRows { needed: usize, got: usize },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("every hidden size diverged")]
    AllDiverged,
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Chronological tail of the rows held out for model selection.
    pub validation_fraction: f64,
    /// Epochs without a new best training loss before the rate is halved.
    pub plateau_patience: usize,
    /// Training stops once the rate has been halved below this value.
    pub min_learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.01,
            batch_size: 32,
            seed: 0,
            validation_fraction: 0.15,
            plateau_patience: 50,
            min_learning_rate: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: &str| Err(NnError::Config(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(0.0..0.5).contains(&self.validation_fraction) {
            return bad("validation_fraction must be in [0, 0.5)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub hidden: usize,
    pub seed: u64,
    pub epochs_run: usize,
    /// Full-pass training MSE (scaled space) after each epoch.
    pub epoch_losses: Vec<f64>,
    pub train_mape: f64,
    pub validation_mape: Option<f64>,
    /// Filled in when the model is scored on a held-out test window.
    pub test_mape: Option<f64>,
    pub early_stopped: bool,
    pub final_learning_rate: f64,
}

impl TrainReport {
    /// Score used for model selection: validation MAPE, else training MAPE.
    pub fn selection_mape(&self) -> f64 {
        self.validation_mape.unwrap_or(self.train_mape)
    }
}

/// Splits rows `0..n` into a training head and a chronological validation tail.
fn validation_cut(n: usize, fraction: f64) -> usize {
    let n_val = (n as f64 * fraction).floor() as usize;
    n - n_val
}

/// Trains a network with `hidden` units on every column of `m`.
pub fn train(m: &FeatureMatrix, hidden: usize, config: &TrainConfig) -> Result<(MlpModel, TrainReport), NnError> {
    config.validate()?;
    if !(1..=MAX_HIDDEN).contains(&hidden) {
        return Err(NnError::BadHidden(hidden));
    }
    let n = m.n_rows();
    if n < MIN_ROWS {
        return Err(NnError::InsufficientRows { needed: MIN_ROWS, got: n });
    }
    let cut = validation_cut(n, config.validation_fraction);

    let train_cols: Vec<&[f64]> = m.columns().iter().map(|c| &c[..cut]).collect();
    let input_scaler = Scaler::fit(&train_cols)?;
    let target_scaler = Scaler::fit(&[&m.target()[..cut]]).map_err(|_| NnError::ConstantColumn(m.n_cols()))?;

    let rows: Vec<Vec<f64>> = (0..n).map(|i| input_scaler.apply_row(&m.row(i))).collect();
    let ys: Vec<f64> = m.target().iter().map(|&y| target_scaler.apply(0, y)).collect();
    let (x_train, y_train) = (&rows[..cut], &ys[..cut]);

    let mut model = MlpModel::init(m.names().to_vec(), hidden, input_scaler, target_scaler, config.seed);
    let mut rng = sim::rng(config.seed.wrapping_add(0x5eed));
    let mut order: Vec<usize> = (0..cut).collect();
    let mut lr = config.learning_rate;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut losses = Vec::with_capacity(config.epochs);
    let mut early_stopped = false;
    let mut params = model.params();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let bx: Vec<Vec<f64>> = batch.iter().map(|&i| x_train[i].clone()).collect();
            let by: Vec<f64> = batch.iter().map(|&i| y_train[i]).collect();
            let g = model.gradient(&bx, &by);
            for (p, gi) in params.iter_mut().zip(&g) {
                *p -= lr * gi;
            }
            model.set_params(&params);
        }
        let loss = model.loss(x_train, y_train);
        if !loss.is_finite() || !model.is_finite() {
            return Err(NnError::Diverged { epoch, loss });
        }
        losses.push(loss);
        if loss < best {
            best = loss;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.plateau_patience {
                lr *= 0.5;
                since_best = 0;
                if lr < config.min_learning_rate {
                    early_stopped = true;
                    break;
                }
            }
        }
    }

    let predict = |range: std::ops::Range<usize>| -> Result<Vec<f64>, NnError> {
        range
            .map(|i| {
                model
                    .forward(&rows[i])
                    .map(|v| model.target_scaler.invert(0, v))
            })
            .collect()
    };
    let train_mape = metrics::mape(&m.target()[..cut], &predict(0..cut)?)?;
    let validation_mape = if cut < n {
        Some(metrics::mape(&m.target()[cut..], &predict(cut..n)?)?)
    } else {
        None
    };
    let report = TrainReport {
        hidden,
        seed: config.seed,
        epochs_run: losses.len(),
        epoch_losses: losses,
        train_mape,
        validation_mape,
        test_mape: None,
        early_stopped,
        final_learning_rate: lr,
    };
    Ok((model, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub hidden: usize,
    pub report: Option<TrainReport>,
    /// Set when this size failed (e.g. diverged); excluded from selection.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Exactly one entry per hidden size 1..=10.
    pub entries: Vec<SweepEntry>,
    pub best_hidden: usize,
    pub model: MlpModel,
}

impl SweepResult {
    pub fn best_report(&self) -> &TrainReport {
        self.entries[self.best_hidden - 1]
            .report
            .as_ref()
            .expect("best entry trained")
    }
}

type Trained = Result<(MlpModel, TrainReport), NnError>;

/// Trains hidden sizes 1..=10 (seed `config.seed + size`) and keeps the
/// one with the lowest validation MAPE; ties go to the smaller size.
pub fn sweep(m: &FeatureMatrix, config: &TrainConfig) -> Result<SweepResult, NnError> {
    config.validate()?;
    if m.n_rows() < MIN_ROWS {
        return Err(NnError::InsufficientRows {
            needed: MIN_ROWS,
            got: m.n_rows(),
        });
    }
    let runs: Vec<(usize, Trained)> = (1..=MAX_HIDDEN)
        .into_par_iter()
        .map(|h| {
            let cfg = TrainConfig {
                seed: config.seed.wrapping_add(h as u64),
                ..config.clone()
            };
            (h, train(m, h, &cfg))
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (h, r) in &runs {
        if let Ok((_, rep)) = r {
            let score = rep.selection_mape();
            if best.is_none_or(|(_, s)| score < s) {
                best = Some((*h, score));
            }
        }
    }
    let (best_hidden, _) = best.ok_or(NnError::AllDiverged)?;

    let mut model = None;
    let mut entries = Vec::with_capacity(MAX_HIDDEN);
    for (h, r) in runs {
        match r {
            Ok((mdl, rep)) => {
                if h == best_hidden {
                    model = Some(mdl);
                }
                entries.push(SweepEntry {
                    hidden: h,
                    report: Some(rep),
                    error: None,
                });
            }
            Err(e) => entries.push(SweepEntry {
                hidden: h,
                report: None,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(SweepResult {
        entries,
        best_hidden,
        model: model.expect("best model present"),
    })
}
