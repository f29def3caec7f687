use super::{FeatureMatrix, RegressionError, FEATURE_NAMES};
use crate::indicators::IndicatorSet;
use crate::ingest::PriceFrame;

/// Assembles x1..x9 for each day `t` with target `close[t + 1]`.
///
/// `eurusd_forecast[i]` and `oil_forecast[i]` are the one-step forecasts
/// *of* day `i` made on day `i - 1`, so row `t` reads index `t + 1`. Leading
/// rows with any unavailable cell are warm-up and dropped; a gap after the
/// first complete row is an error. x8/x9 use the first two configured EMA
/// periods.
pub fn build_features(
    gold: &PriceFrame,
    indicators: &IndicatorSet,
    eurusd_forecast: &[Option<f64>],
    oil_forecast: &[Option<f64>],
) -> Result<FeatureMatrix, RegressionError> {
    let n = gold.len();
    let dates = gold.dates();
    if indicators.dates != dates {
        return Err(RegressionError::Alignment("indicator calendar differs from gold".into()));
    }
    if eurusd_forecast.len() != n || oil_forecast.len() != n {
        return Err(RegressionError::Alignment(format!(
            "forecast lengths {}/{} differ from {n} gold bars",
            eurusd_forecast.len(),
            oil_forecast.len()
        )));
    }
    if indicators.ema.len() < 2 {
        return Err(RegressionError::Alignment("two EMA periods are required".into()));
    }
    let opens = gold.opens();
    let closes = gold.closes();

    let cells = |t: usize| -> [Option<f64>; 9] {
        [
            Some(opens[t]),
            eurusd_forecast[t + 1],
            oil_forecast[t + 1],
            indicators.rsi[t],
            indicators.stoch_k[t],
            indicators.stoch_d[t],
            indicators.williams_r[t],
            Some(indicators.ema[0][t]),
            Some(indicators.ema[1][t]),
        ]
    };

    let last = n.saturating_sub(1);
    let first = (0..last)
        .find(|&t| cells(t).iter().all(Option::is_some))
        .ok_or(RegressionError::Empty)?;

    let mut columns: Vec<Vec<f64>> = (0..9).map(|_| Vec::with_capacity(last - first)).collect();
    let mut target = Vec::with_capacity(last - first);
    let mut row_dates = Vec::with_capacity(last - first);
    for t in first..last {
        let row = cells(t);
        for (j, cell) in row.iter().enumerate() {
            match cell {
                Some(v) => columns[j].push(*v),
                None => {
                    return Err(RegressionError::Alignment(format!(
                        "{} unavailable on {} after warm-up",
                        FEATURE_NAMES[j], dates[t]
                    )))
                }
            }
        }
        target.push(closes[t + 1]);
        row_dates.push(dates[t + 1]);
    }
    FeatureMatrix::new(
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        columns,
        target,
        row_dates,
    )
}
