//! Forecast accuracy: mean absolute percentage error and its complement.

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {actual} actual vs {forecast} forecast values")]
    LengthMismatch { actual: usize, forecast: usize },
    #[error("empty input")]
    Empty,
    #[error("actual value at index {0} is zero")]
    ZeroActual(usize),
}

/// `100/n · Σ |A_i − F_i| / |A_i|`.
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<f64, MetricsError> {
    if actual.len() != forecast.len() {
        return Err(MetricsError::LengthMismatch {
            actual: actual.len(),
            forecast: forecast.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut total = 0.0;
    for (i, (a, f)) in actual.iter().zip(forecast).enumerate() {
        if *a == 0.0 {
            return Err(MetricsError::ZeroActual(i));
        }
        total += ((a - f) / a).abs();
    }
    Ok(total / actual.len() as f64 * 100.0)
}

/// `100 − MAPE`.
pub fn accuracy(actual: &[f64], forecast: &[f64]) -> Result<f64, MetricsError> {
    mape(actual, forecast).map(|m| 100.0 - m)
}

/// Dated predictions against actuals, with their MAPE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub dates: Vec<NaiveDate>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    pub mape: f64,
    /// `100 - mape`.
    pub accuracy: f64,
}

impl AccuracyReport {
    pub fn new(dates: Vec<NaiveDate>, actual: Vec<f64>, predicted: Vec<f64>) -> Result<Self, MetricsError> {
        if dates.len() != actual.len() {
            return Err(MetricsError::LengthMismatch {
                actual: actual.len(),
                forecast: dates.len(),
            });
        }
        let mape = mape(&actual, &predicted)?;
        Ok(Self {
            dates,
            actual,
            predicted,
            mape,
            accuracy: 100.0 - mape,
        })
    }

    /// Writes `date,actual,predicted`. Values use the shortest exact
    /// decimal form, so reading them back reproduces the same MAPE.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "actual", "predicted"])?;
        for ((d, a), p) in self.dates.iter().zip(&self.actual).zip(&self.predicted) {
            w.write_record([d.format("%Y-%m-%d").to_string(), a.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
