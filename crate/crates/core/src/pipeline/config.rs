use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Stage};
use crate::arima::{Criterion, FitOptions};
use crate::indicators::IndicatorParams;
use crate::ingest::SplitSpec;
use crate::neuralnet::TrainConfig;
use crate::regression::{Direction, SelectionCriterion};

/// Differencing order: chosen by the stationarity heuristic or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DiffOrder {
    Auto,
    Fixed(usize),
}

impl FromStr for DiffOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "0" => Ok(Self::Fixed(0)),
            "1" => Ok(Self::Fixed(1)),
            "2" => Ok(Self::Fixed(2)),
            other => Err(format!("differencing order must be auto, 0, 1 or 2, got `{other}`")),
        }
    }
}

impl TryFrom<String> for DiffOrder {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DiffOrder> for String {
    fn from(d: DiffOrder) -> Self {
        d.to_string()
    }
}

impl fmt::Display for DiffOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(d) => write!(f, "{d}"),
        }
    }
}

/// Flat key/value configuration, read from TOML. Every key is optional;
/// relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub gold: PathBuf,
    pub oil: PathBuf,
    pub eurusd: PathBuf,
    pub out: PathBuf,

    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,

    pub arima_d: DiffOrder,
    pub arima_max_p: usize,
    pub arima_max_q: usize,
    pub arima_criterion: Criterion,
    pub stationarity_threshold: f64,
    pub correlogram_lags: usize,
    pub whiteness_lags: usize,

    pub ema_fast: usize,
    pub ema_slow: usize,
    pub rsi_period: usize,
    pub stoch_period: usize,
    pub stoch_d_period: usize,

    pub stepwise_criterion: SelectionCriterion,
    /// Which stepwise direction's subset feeds the network.
    pub nn_subset: Direction,

    pub nn_epochs: usize,
    pub nn_learning_rate: f64,
    pub nn_batch_size: usize,
    pub nn_validation_fraction: f64,
    pub nn_plateau_patience: usize,

    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let split = SplitSpec::default();
        let ind = IndicatorParams::default();
        let nn = TrainConfig::default();
        Self {
            gold: "gold.csv".into(),
            oil: "oil.csv".into(),
            eurusd: "eurusd.csv".into(),
            out: "out".into(),
            train_start: split.train_start,
            train_end: split.train_end,
            test_start: split.test_start,
            test_end: split.test_end,
            arima_d: DiffOrder::Auto,
            arima_max_p: 3,
            arima_max_q: 3,
            arima_criterion: Criterion::Sic,
            stationarity_threshold: crate::series::DEFAULT_STATIONARITY_THRESHOLD,
            correlogram_lags: 20,
            whiteness_lags: 10,
            ema_fast: ind.ema_periods[0],
            ema_slow: ind.ema_periods[1],
            rsi_period: ind.rsi_period,
            stoch_period: ind.stoch_period,
            stoch_d_period: ind.stoch_d_period,
            stepwise_criterion: SelectionCriterion::Bic,
            nn_subset: Direction::Backward,
            nn_epochs: nn.epochs,
            nn_learning_rate: nn.learning_rate,
            nn_batch_size: nn.batch_size,
            nn_validation_fraction: nn.validation_fraction,
            nn_plateau_patience: nn.plateau_patience,
            seed: 0,
        }
    }
}

fn config_error(message: impl Into<String>) -> PipelineError {
    PipelineError::new(Stage::Config, message)
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_relative_to(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_relative_to(&mut self, dir: &Path) {
        for p in [&mut self.gold, &mut self.oil, &mut self.eurusd, &mut self.out] {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn split(&self) -> SplitSpec {
        SplitSpec {
            train_start: self.train_start,
            train_end: self.train_end,
            test_start: self.test_start,
            test_end: self.test_end,
        }
    }

    pub fn indicator_params(&self) -> IndicatorParams {
        IndicatorParams {
            ema_periods: vec![self.ema_fast, self.ema_slow],
            rsi_period: self.rsi_period,
            stoch_period: self.stoch_period,
            stoch_d_period: self.stoch_d_period,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.nn_epochs,
            learning_rate: self.nn_learning_rate,
            batch_size: self.nn_batch_size,
            seed: self.seed,
            validation_fraction: self.nn_validation_fraction,
            plateau_patience: self.nn_plateau_patience,
            ..TrainConfig::default()
        }
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            seed: self.seed,
            ..FitOptions::default()
        }
    }

    /// Checks files, split and parameter ranges.
    pub fn validate(&self) -> Result<(), PipelineError> {
        for (key, p) in [("gold", &self.gold), ("oil", &self.oil), ("eurusd", &self.eurusd)] {
            if !p.is_file() {
                return Err(config_error(format!("{key}: no such file {}", p.display())));
            }
        }
        self.split().validate().map_err(|e| config_error(e.to_string()))?;
        self.indicator_params()
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        self.train_config()
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        if self.correlogram_lags == 0 || self.whiteness_lags == 0 {
            return Err(config_error("correlogram_lags and whiteness_lags must be >= 1"));
        }
        if !(self.stationarity_threshold > 0.0 && self.stationarity_threshold < 1.0) {
            return Err(config_error("stationarity_threshold must be in (0, 1)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = PipelineConfig {
            arima_d: DiffOrder::Fixed(1),
            nn_subset: Direction::Forward,
            seed: 42,
            ..PipelineConfig::default()
        };
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn parses_flat_keys() {
        let c = PipelineConfig::from_toml(
            "gold = \"g.csv\"\narima_d = \"2\"\narima_criterion = \"aic\"\ntest_end = \"2018-06-30\"\nnn_epochs = 10\n",
        )
        .unwrap();
        assert_eq!(c.gold, PathBuf::from("g.csv"));
        assert_eq!(c.arima_d, DiffOrder::Fixed(2));
        assert_eq!(c.arima_criterion, Criterion::Aic);
        assert_eq!(c.test_end, NaiveDate::from_ymd_opt(2018, 6, 30).unwrap());
        assert_eq!(c.train_config().epochs, 10);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        for bad in ["nn_epoch = 3", "arima_d = \"3\"", "stepwise_criterion = \"r2\""] {
            let e = PipelineConfig::from_toml(bad).unwrap_err();
            assert_eq!(e.stage, Stage::Config, "{bad}");
        }
    }

    #[test]
    fn missing_files_fail_validation() {
        let mut c = PipelineConfig::default();
        c.resolve_relative_to(Path::new("/nonexistent"));
        let e = c.validate().unwrap_err();
        assert!(e.to_string().contains("gold"));
    }
}
