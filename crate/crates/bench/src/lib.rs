//! Inputs shared by the criterion benchmarks under `benches/`.

use hybridcast::fixture::{self, SyntheticMarket};
use hybridcast::regression::{self, FeatureMatrix};
use hybridcast::{IndicatorParams, IndicatorSet};

pub const SEED: u64 = fixture::DEFAULT_SEED;

pub fn market() -> SyntheticMarket {
    fixture::synthetic_market(SEED)
}

/// The nine-column design on synthetic gold, with naive previous-close
/// forecasts standing in for the ARIMA columns.
pub fn features(m: &SyntheticMarket) -> FeatureMatrix {
    let naive = |closes: Vec<f64>| -> Vec<Option<f64>> {
        std::iter::once(None)
            .chain(closes[..closes.len() - 1].iter().copied().map(Some))
            .collect()
    };
    let ind = IndicatorSet::compute(&m.gold, &IndicatorParams::default()).expect("indicators");
    let all = regression::build_features(&m.gold, &ind, &naive(m.eurusd.closes()), &naive(m.oil.closes()))
        .expect("features");
    all.drop_aliased().expect("drop aliased").0
}
