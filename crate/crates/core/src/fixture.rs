//! Seeded three-asset market used by the end-to-end tests and the bundled
//! example data.
//!
//! Oil follows a log ARIMA(1,1,0) and EUR-USD a log random walk that picks
//! up a trend in the final year. Gold's next close is built from today's
//! open, EMA10 and RSI14:
//!
//! ```text
//! close[t+1] = 0.5 open[t] + 0.3 ema10[t] + 0.2 A
//!              - 1.5 max(0, open[t] - A) - 0.5 (rsi14[t] - 50) + noise
//! ```
//!
//! with anchor `A = 1250`. A linear model captures most of it; the kink at
//! the anchor is what the network can add. Neither oil nor EUR-USD enters gold.

use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::indicators;
use crate::ingest::{IngestError, OhlcBar, PriceFrame};
use crate::pipeline::PipelineConfig;
use crate::sim;

pub const GOLD_OPEN_WEIGHT: f64 = 0.5;
pub const GOLD_EMA_WEIGHT: f64 = 0.3;
/// Weight on the fixed anchor level; makes gold mean-reverting.
pub const GOLD_ANCHOR_WEIGHT: f64 = 0.2;
pub const GOLD_ANCHOR: f64 = 1250.0;
/// Extra pull back toward the anchor when the open is above it.
pub const GOLD_KINK: f64 = 1.5;
pub const GOLD_RSI_WEIGHT: f64 = 0.5;
pub const GOLD_NOISE: f64 = 3.0;
/// Daily log drift of oil and EUR-USD during 2018, absent before.
pub const OIL_TEST_DRIFT: f64 = 0.003;
pub const EURUSD_TEST_DRIFT: f64 = -0.003;
pub const DEFAULT_SEED: u64 = 2019;
/// Network schedule shipped with the fixture config. The library defaults
/// (500 epochs at 0.01) leave some sweep members short of convergence on
/// this data; the ordering of stages then depends on the seed.
pub const FIXTURE_NN_EPOCHS: usize = 1000;
pub const FIXTURE_NN_LEARNING_RATE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket {
    pub gold: PriceFrame,
    pub oil: PriceFrame,
    pub eurusd: PriceFrame,
}

/// Monday–Friday dates in `[from, to]`.
pub fn business_days(from: NaiveDate, to: NaiveDate) -> Vec<NaiveDate> {
    from.iter_days()
        .take_while(|d| *d <= to)
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect()
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

/// Wraps a close path in bars whose open is the previous close plus noise
/// and whose range covers open and close.
fn bars_around(dates: &[NaiveDate], closes: &[f64], rel_noise: f64, rng: &mut ChaCha8Rng) -> Vec<OhlcBar> {
    let mut prev = closes[0];
    dates
        .iter()
        .zip(closes)
        .map(|(&date, &close)| {
            let open = prev * (1.0 + rel_noise * 0.3 * std_normal(rng));
            prev = close;
            let hi = open.max(close) * (1.0 + rel_noise * std_normal(rng).abs());
            let lo = open.min(close) * (1.0 - rel_noise * std_normal(rng).abs());
            OhlcBar {
                date,
                open,
                high: hi,
                low: lo,
                close,
            }
        })
        .collect()
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").sample(rng)
}

fn oil(dates: &[NaiveDate], seed: u64) -> Result<PriceFrame, IngestError> {
    let log = sim::arima(&[0.3], &[], 1, 0.0, 0.005, dates.len(), 0.0, seed);
    let trend_from = date(2018, 1, 1);
    let mut lift = 0.0;
    let closes: Vec<f64> = log
        .iter()
        .zip(dates)
        .map(|(x, d)| {
            if *d >= trend_from {
                lift += OIL_TEST_DRIFT;
            }
            55.0 * (x + lift).exp()
        })
        .collect();
    let mut rng = sim::rng(seed ^ 0x011);
    PriceFrame::new("oil", bars_around(dates, &closes, 0.004, &mut rng))
}

fn eurusd(dates: &[NaiveDate], seed: u64) -> Result<PriceFrame, IngestError> {
    let trend_from = date(2018, 1, 1);
    let mut rng = sim::rng(seed);
    let mut x = 0.0;
    let closes: Vec<f64> = dates
        .iter()
        .map(|d| {
            let drift = if *d >= trend_from { EURUSD_TEST_DRIFT } else { 0.0 };
            x += drift + 0.002 * std_normal(&mut rng);
            1.12 * f64::exp(x)
        })
        .collect();
    let mut rng = sim::rng(seed ^ 0xe0);
    PriceFrame::new("eurusd", bars_around(dates, &closes, 0.001, &mut rng))
}

/// Noise-free next close given today's open, EMA10 and RSI14.
pub fn gold_rule(open: f64, ema10: f64, rsi14: Option<f64>) -> f64 {
    GOLD_OPEN_WEIGHT * open + GOLD_EMA_WEIGHT * ema10 + GOLD_ANCHOR_WEIGHT * GOLD_ANCHOR
        - GOLD_KINK * (open - GOLD_ANCHOR).max(0.0)
        - rsi14.map_or(0.0, |r| GOLD_RSI_WEIGHT * (r - 50.0))
}

fn gold(dates: &[NaiveDate], seed: u64) -> Result<PriceFrame, IngestError> {
    let n = dates.len();
    let mut rng = sim::rng(seed);
    let mut closes = Vec::with_capacity(n);
    let mut opens = Vec::with_capacity(n);
    closes.push(1200.0);
    opens.push(1200.0);
    for t in 0..n - 1 {
        let ema10 = *indicators::ema(&closes, 10).expect("period 10").last().expect("non-empty");
        let rsi = if closes.len() > 14 {
            indicators::rsi(&closes, 14).expect("period 14")[t]
        } else {
            None
        };
        let next = gold_rule(opens[t], ema10, rsi) + GOLD_NOISE * std_normal(&mut rng);
        closes.push(next);
        opens.push(closes[t] + 2.0 * std_normal(&mut rng));
    }
    let bars = dates
        .iter()
        .enumerate()
        .map(|(t, &date)| {
            let (o, c) = (opens[t], closes[t]);
            OhlcBar {
                date,
                open: o,
                high: o.max(c) + 3.0 * rng.random::<f64>(),
                low: o.min(c) - 3.0 * rng.random::<f64>(),
                close: c,
            }
        })
        .collect();
    PriceFrame::new("gold", bars)
}

/// Business days from 2015-01-01 through 2019-01-01.
pub fn synthetic_market(seed: u64) -> SyntheticMarket {
    let dates = business_days(date(2015, 1, 1), date(2019, 1, 1));
    SyntheticMarket {
        gold: gold(&dates, seed).expect("valid gold bars"),
        oil: oil(&dates, seed.wrapping_add(1)).expect("valid oil bars"),
        eurusd: eurusd(&dates, seed.wrapping_add(2)).expect("valid eurusd bars"),
    }
}

/// Config matching the files written by [`SyntheticMarket::save`], with
/// paths relative to the data directory.
pub fn pipeline_config(seed: u64) -> PipelineConfig {
    PipelineConfig {
        seed,
        nn_epochs: FIXTURE_NN_EPOCHS,
        nn_learning_rate: FIXTURE_NN_LEARNING_RATE,
        ..PipelineConfig::default()
    }
}

impl SyntheticMarket {
    /// Writes `gold.csv`, `oil.csv` and `eurusd.csv` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), IngestError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|source| IngestError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        self.gold.save_csv(dir.join("gold.csv"))?;
        self.oil.save_csv(dir.join("oil.csv"))?;
        self.eurusd.save_csv(dir.join("eurusd.csv"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calendar_is_weekdays() {
        let d = business_days(date(2015, 1, 1), date(2015, 1, 12));
        assert_eq!(d.len(), 8);
        assert!(d.iter().all(|x| x.weekday().number_from_monday() <= 5));
    }

    #[test]
    fn deterministic_and_shared_calendar() {
        let a = synthetic_market(1);
        let b = synthetic_market(1);
        assert_eq!(a, b);
        assert_eq!(a.gold.dates(), a.oil.dates());
        assert_eq!(a.gold.dates(), a.eurusd.dates());
        assert_ne!(a.gold, synthetic_market(2).gold);
    }

    #[test]
    fn gold_follows_its_rule() {
        let m = synthetic_market(3);
        let closes = m.gold.closes();
        let opens = m.gold.opens();
        let ema10 = indicators::ema(&closes, 10).unwrap();
        let rsi = indicators::rsi(&closes, 14).unwrap();
        let resid: Vec<f64> = (14..closes.len() - 1)
            .map(|t| {
                closes[t + 1] - gold_rule(opens[t], ema10[t], rsi[t])
            })
            .collect();
        let n = resid.len() as f64;
        let mean = resid.iter().sum::<f64>() / n;
        let sd = (resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1.0, "mean {mean}");
        assert!((sd - GOLD_NOISE).abs() < 0.5, "sd {sd}");
    }
}
