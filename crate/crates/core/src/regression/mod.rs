//! Nine-regressor design, OLS and stepwise selection.
//!
//! | column | meaning |
//! |--------|---------|
//! | x1 | today's gold open |
//! | x2 | EUR-USD one-step ARIMA forecast for the next trading day |
//! | x3 | oil one-step ARIMA forecast for the next trading day |
//! | x4 | RSI |
//! | x5 | stochastic %K |
//! | x6 | stochastic %D |
//! | x7 | Williams %R |
//! | x8 | fast EMA (5 by default) |
//! | x9 | slow EMA (10 by default) |
//!
//! The target `y` is the next trading day's gold close.

mod features;
mod ols;
mod stepwise;

use std::collections::HashSet;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use features::build_features;
pub use ols::{evaluate, ols, RegressionFit};
pub use stepwise::{stepwise, Action, Direction, Step, StepwiseTrace};

use crate::metrics::MetricsError;

pub const FEATURE_NAMES: [&str; 9] = ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9"];

pub const FEATURE_LABELS: [&str; 9] = [
    "open",
    "eurusd_forecast",
    "oil_forecast",
    "rsi",
    "stoch_k",
    "stoch_d",
    "williams_r",
    "ema_fast",
    "ema_slow",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error("rank-deficient design; collinear column(s): {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("inputs not aligned: {0}")]
    Alignment(String),
    #[error("feature matrix is empty")]
    Empty,
    #[error("need at least {needed} rows, got {rows}")]
    TooFewRows { rows: usize, needed: usize },
    #[error("non-finite value in column `{0}`")]
    NonFinite(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionCriterion {
    Bic,
    Aic,
}

impl std::str::FromStr for SelectionCriterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bic" | "sic" => Ok(Self::Bic),
            "aic" => Ok(Self::Aic),
            other => Err(format!("unknown criterion `{other}` (expected bic or aic)")),
        }
    }
}

/// Named regressor columns plus the target, one row per target date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target: Vec<f64>,
    /// Date of the target observation for each row.
    dates: Vec<NaiveDate>,
}

impl FeatureMatrix {
    pub fn new(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target: Vec<f64>,
        dates: Vec<NaiveDate>,
    ) -> Result<Self, RegressionError> {
        if target.is_empty() {
            return Err(RegressionError::Empty);
        }
        if names.len() != columns.len() || dates.len() != target.len() {
            return Err(RegressionError::Alignment("names/columns or dates/target differ in length".into()));
        }
        let mut seen = HashSet::new();
        for (name, col) in names.iter().zip(&columns) {
            if !seen.insert(name) {
                return Err(RegressionError::DuplicateColumn(name.clone()));
            }
            if col.len() != target.len() {
                return Err(RegressionError::Alignment(format!(
                    "column `{name}` has {} rows, target has {}",
                    col.len(),
                    target.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(RegressionError::NonFinite(name.clone()));
            }
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(RegressionError::NonFinite("y".into()));
        }
        Ok(Self {
            names,
            columns,
            target,
            dates,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    /// Row `i` across all columns.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Projection onto `names`, in that order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureMatrix, RegressionError> {
        let mut cols = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            cols.push(
                self.column(n)
                    .ok_or_else(|| RegressionError::MissingColumn(n.to_string()))?
                    .to_vec(),
            );
        }
        FeatureMatrix::new(
            names.iter().map(|n| n.as_ref().to_string()).collect(),
            cols,
            self.target.clone(),
            self.dates.clone(),
        )
    }

    /// Rows whose target date satisfies `keep`; `None` if none do.
    pub fn filter_dates(&self, keep: impl Fn(NaiveDate) -> bool) -> Option<FeatureMatrix> {
        let idx: Vec<usize> = (0..self.n_rows()).filter(|&i| keep(self.dates[i])).collect();
        if idx.is_empty() {
            return None;
        }
        Some(FeatureMatrix {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| idx.iter().map(|&i| c[i]).collect())
                .collect(),
            target: idx.iter().map(|&i| self.target[i]).collect(),
            dates: idx.iter().map(|&i| self.dates[i]).collect(),
        })
    }

    /// Drops columns that are linear combinations of the intercept and the
    /// columns kept before them, scanning in column order.
    pub fn drop_aliased(&self) -> Result<(FeatureMatrix, Vec<String>), RegressionError> {
        let mut kept: Vec<String> = Vec::new();
        let mut dropped = Vec::new();
        for name in &self.names {
            let mut trial = kept.clone();
            trial.push(name.clone());
            match ols(self, &trial) {
                Ok(_) => kept = trial,
                Err(RegressionError::RankDeficient { .. }) => dropped.push(name.clone()),
                Err(e) => return Err(e),
            }
        }
        Ok((self.select(&kept)?, dropped))
    }

    /// Writes `date,<columns...>,y`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), RegressionError> {
        let io = |e: csv::Error| RegressionError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.names.iter().cloned());
        header.push("y".into());
        w.write_record(&header).map_err(io)?;
        for i in 0..self.n_rows() {
            let mut rec = vec![self.dates[i].format("%Y-%m-%d").to_string()];
            rec.extend(self.columns.iter().map(|c| c[i].to_string()));
            rec.push(self.target[i].to_string());
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| RegressionError::Io(e.to_string()))
    }

    /// Reads the layout produced by [`FeatureMatrix::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<FeatureMatrix, RegressionError> {
        let io = |e: csv::Error| RegressionError::Io(e.to_string());
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers().map_err(io)?.iter().map(String::from).collect();
        if header.len() < 2 || header[0] != "date" || header.last().map(String::as_str) != Some("y") {
            return Err(RegressionError::Io(format!(
                "expected header `date,<columns>,y`, got {header:?}"
            )));
        }
        let names: Vec<String> = header[1..header.len() - 1].to_vec();
        let mut columns = vec![Vec::new(); names.len()];
        let mut target = Vec::new();
        let mut dates = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(io)?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |what: &str| RegressionError::Io(format!("line {line}: bad {what}"));
            dates.push(NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|_| bad("date"))?);
            for (j, col) in columns.iter_mut().enumerate() {
                col.push(rec[j + 1].parse().map_err(|_| bad(&names[j]))?);
            }
            target.push(rec[names.len() + 1].parse().map_err(|_| bad("y"))?);
        }
        FeatureMatrix::new(names, columns, target, dates)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::sim;
    use rand_distr::{Distribution, Normal};

    pub fn dates(n: usize) -> Vec<NaiveDate> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        (0..n).map(|i| start + chrono::Days::new(i as u64)).collect()
    }

    /// `y = 2 x1 + 0.5 x3 + N(0, noise)` over five standard-normal columns.
    pub fn two_true_regressors(n: usize, noise: f64, seed: u64) -> FeatureMatrix {
        let mut rng = sim::rng(seed);
        let z = Normal::new(0.0, 1.0).unwrap();
        let cols: Vec<Vec<f64>> = (0..5).map(|_| (0..n).map(|_| z.sample(&mut rng)).collect()).collect();
        let e = Normal::new(0.0, noise).unwrap();
        let y = (0..n)
            .map(|i| 2.0 * cols[0][i] + 0.5 * cols[2][i] + e.sample(&mut rng))
            .collect();
        FeatureMatrix::new(
            ["x1", "x2", "x3", "x4", "x5"].map(String::from).to_vec(),
            cols,
            y,
            dates(n),
        )
        .unwrap()
    }
}
