//! Hybrid daily price forecasting.
//!
//! The crate chains four stages, each usable on its own:
//!
//! 1. [`arima`]: Box–Jenkins ARIMA(p,d,q) estimated by conditional sum of
//!    squares, with AIC/SIC order search and rolling one-step forecasts.
//! 2. [`indicators`]: EMA, RSI, stochastic %K/%D and Williams %R.
//! 3. [`regression`]: a nine-regressor design, OLS via pivoted QR and
//!    forward/backward stepwise selection by information criterion.
//! 4. [`neuralnet`]: a one-hidden-layer ReLU network trained on the
//!    stepwise-selected columns, with a 1..=10 hidden-size sweep.
//!
//! [`pipeline`] runs the full chain from a TOML configuration file and
//! writes a JSON report plus CSV artifacts.

pub mod arima;
pub mod fixture;
pub mod indicators;
pub mod ingest;
pub mod linalg;
pub mod metrics;
pub mod neuralnet;
pub mod pipeline;
pub mod regression;
pub mod series;
pub mod sim;

pub use arima::{ArimaError, ArimaFit, ArimaSpec, Criterion, Forecast};
pub use indicators::{IndicatorError, IndicatorParams, IndicatorSet};
pub use ingest::{IngestError, OhlcBar, PriceFrame, SplitSpec};
pub use metrics::{accuracy, mape, MetricsError};
pub use neuralnet::{MlpModel, NnError, Scaler, SweepResult, TrainConfig, TrainReport};
pub use pipeline::{PipelineConfig, PipelineError, PipelineReport};
pub use regression::{
    Direction, FeatureMatrix, RegressionError, RegressionFit, SelectionCriterion, StepwiseTrace,
};
pub use series::{CorrelogramResult, Series, SeriesError, WhitenessReport};
