//! Technical-analysis indicators: EMA, RSI, stochastic %K/%D and
//! Williams %R (positive 0–100 form, so `%R = 100 − %K`).
//!
//! Windowed indicators are returned aligned to the input, with `None`
//! during warm-up.

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::PriceFrame;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicatorError {
    #[error("empty series")]
    Empty,
    #[error("series too short: need {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("period {0} must be >= 2")]
    BadPeriod(usize),
    #[error("write failed: {0}")]
    Write(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndicatorParams {
    pub ema_periods: Vec<usize>,
    pub rsi_period: usize,
    pub stoch_period: usize,
    pub stoch_d_period: usize,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        Self {
            ema_periods: vec![5, 10],
            rsi_period: 14,
            stoch_period: 14,
            stoch_d_period: 3,
        }
    }
}

impl IndicatorParams {
    pub fn validate(&self) -> Result<(), IndicatorError> {
        let all = self
            .ema_periods
            .iter()
            .chain([&self.rsi_period, &self.stoch_period, &self.stoch_d_period]);
        for &p in all {
            if p < 2 {
                return Err(IndicatorError::BadPeriod(p));
            }
        }
        Ok(())
    }
}

fn check_period(n: usize) -> Result<(), IndicatorError> {
    if n < 2 {
        Err(IndicatorError::BadPeriod(n))
    } else {
        Ok(())
    }
}

/// Exponential moving average with `α = 2/(n+1)`, seeded with the first price.
pub fn ema(closes: &[f64], n: usize) -> Result<Vec<f64>, IndicatorError> {
    check_period(n)?;
    let Some(&first) = closes.first() else {
        return Err(IndicatorError::Empty);
    };
    let alpha = 2.0 / (n as f64 + 1.0);
    let mut prev = first;
    Ok(closes
        .iter()
        .map(|&p| {
            prev = alpha * p + (1.0 - alpha) * prev;
            prev
        })
        .collect())
}

/// Relative strength index with Wilder smoothing; first value at index `n`.
pub fn rsi(closes: &[f64], n: usize) -> Result<Vec<Option<f64>>, IndicatorError> {
    check_period(n)?;
    if closes.len() < n + 1 {
        return Err(IndicatorError::TooShort {
            needed: n + 1,
            got: closes.len(),
        });
    }
    let value = |gain: f64, loss: f64| {
        if loss == 0.0 {
            100.0
        } else if gain == 0.0 {
            0.0
        } else {
            100.0 - 100.0 / (1.0 + gain / loss)
        }
    };
    let mut out = vec![None; closes.len()];
    let (mut gain, mut loss) = (0.0, 0.0);
    for w in closes[..=n].windows(2) {
        let ch = w[1] - w[0];
        if ch > 0.0 {
            gain += ch;
        } else {
            loss -= ch;
        }
    }
    gain /= n as f64;
    loss /= n as f64;
    out[n] = Some(value(gain, loss));
    let k = n as f64;
    for t in n + 1..closes.len() {
        let ch = closes[t] - closes[t - 1];
        gain = (gain * (k - 1.0) + ch.max(0.0)) / k;
        loss = (loss * (k - 1.0) + (-ch).max(0.0)) / k;
        out[t] = Some(value(gain, loss));
    }
    Ok(out)
}

/// Rolling n-bar highest high and lowest low, defined from index `n - 1`.
fn channel(high: &[f64], low: &[f64], n: usize) -> Vec<Option<(f64, f64)>> {
    (0..high.len())
        .map(|t| {
            (t + 1 >= n).then(|| {
                let hh = high[t + 1 - n..=t].iter().copied().fold(f64::MIN, f64::max);
                let ll = low[t + 1 - n..=t].iter().copied().fold(f64::MAX, f64::min);
                (hh, ll)
            })
        })
        .collect()
}

fn check_bars(len: usize, n: usize) -> Result<(), IndicatorError> {
    check_period(n)?;
    if len < n {
        return Err(IndicatorError::TooShort { needed: n, got: len });
    }
    Ok(())
}

/// `%K = 100 (C − LL) / (HH − LL)`; a flat window gives 50.
pub fn stochastic_k_raw(
    high: &[f64],
    low: &[f64],
    close: &[f64],
    n: usize,
) -> Result<Vec<Option<f64>>, IndicatorError> {
    check_bars(close.len(), n)?;
    Ok(channel(high, low, n)
        .into_iter()
        .zip(close)
        .map(|(ch, &c)| {
            ch.map(|(hh, ll)| {
                if hh == ll {
                    50.0
                } else {
                    100.0 * (c - ll) / (hh - ll)
                }
            })
        })
        .collect())
}

pub fn stochastic_k(frame: &PriceFrame, n: usize) -> Result<Vec<Option<f64>>, IndicatorError> {
    stochastic_k_raw(&frame.highs(), &frame.lows(), &frame.closes(), n)
}

/// Simple `m`-period moving average of %K; `len - m + 1` values.
pub fn stochastic_d(k_values: &[f64], m: usize) -> Result<Vec<f64>, IndicatorError> {
    check_bars(k_values.len(), m)?;
    Ok(k_values
        .windows(m)
        .map(|w| w.iter().sum::<f64>() / m as f64)
        .collect())
}

/// `%R = 100 (HH − C) / (HH − LL)`; a flat window gives 50.
pub fn williams_r_raw(
    high: &[f64],
    low: &[f64],
    close: &[f64],
    n: usize,
) -> Result<Vec<Option<f64>>, IndicatorError> {
    check_bars(close.len(), n)?;
    Ok(channel(high, low, n)
        .into_iter()
        .zip(close)
        .map(|(ch, &c)| {
            ch.map(|(hh, ll)| {
                if hh == ll {
                    50.0
                } else {
                    100.0 * (hh - c) / (hh - ll)
                }
            })
        })
        .collect())
}

pub fn williams_r(frame: &PriceFrame, n: usize) -> Result<Vec<Option<f64>>, IndicatorError> {
    williams_r_raw(&frame.highs(), &frame.lows(), &frame.closes(), n)
}

/// All configured indicators for one frame, aligned to its dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSet {
    pub params: IndicatorParams,
    pub dates: Vec<NaiveDate>,
    /// One column per entry of `params.ema_periods`, same order.
    pub ema: Vec<Vec<f64>>,
    pub rsi: Vec<Option<f64>>,
    pub stoch_k: Vec<Option<f64>>,
    pub stoch_d: Vec<Option<f64>>,
    pub williams_r: Vec<Option<f64>>,
}

impl IndicatorSet {
    pub fn compute(frame: &PriceFrame, params: &IndicatorParams) -> Result<Self, IndicatorError> {
        params.validate()?;
        let closes = frame.closes();
        let ema = params
            .ema_periods
            .iter()
            .map(|&n| self::ema(&closes, n))
            .collect::<Result<Vec<_>, _>>()?;
        let rsi = self::rsi(&closes, params.rsi_period)?;
        let stoch_k = stochastic_k(frame, params.stoch_period)?;
        let williams_r = williams_r(frame, params.stoch_period)?;

        let k_start = params.stoch_period - 1;
        let defined_k: Vec<f64> = stoch_k[k_start..].iter().map(|v| v.expect("defined")).collect();
        let mut stoch_d = vec![None; closes.len()];
        if defined_k.len() >= params.stoch_d_period {
            let d = stochastic_d(&defined_k, params.stoch_d_period)?;
            let offset = k_start + params.stoch_d_period - 1;
            for (i, v) in d.into_iter().enumerate() {
                stoch_d[offset + i] = Some(v);
            }
        }
        Ok(Self {
            params: params.clone(),
            dates: frame.dates(),
            ema,
            rsi,
            stoch_k,
            stoch_d,
            williams_r,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn ema_for(&self, period: usize) -> Option<&[f64]> {
        self.params
            .ema_periods
            .iter()
            .position(|&p| p == period)
            .map(|i| self.ema[i].as_slice())
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.params.ema_periods.iter().map(|p| format!("ema{p}")).collect();
        names.push(format!("rsi{}", self.params.rsi_period));
        names.extend(["stoch_k", "stoch_d", "williams_r"].map(String::from));
        names
    }

    /// Writes `date,ema5,ema10,rsi14,stoch_k,stoch_d,williams_r` with empty
    /// warm-up cells.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), IndicatorError> {
        let err = |e: csv::Error| IndicatorError::Write(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.column_names());
        w.write_record(&header).map_err(err)?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for t in 0..self.len() {
            let mut row = vec![self.dates[t].format("%Y-%m-%d").to_string()];
            row.extend(self.ema.iter().map(|col| col[t].to_string()));
            row.push(cell(self.rsi[t]));
            row.push(cell(self.stoch_k[t]));
            row.push(cell(self.stoch_d[t]));
            row.push(cell(self.williams_r[t]));
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|e| IndicatorError::Write(e.to_string()))
    }
}
