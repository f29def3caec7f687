use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{ArimaError, ArimaFit};
use crate::series;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub horizon: usize,
    /// Price-level forecasts for steps `1..=horizon`.
    pub point: Vec<f64>,
    pub origin_date: Option<NaiveDate>,
}

/// Binomial weights `b_j` with `y_t - Δ^d y_t = Σ_{j=1..d} b_j y_{t-j}`.
fn carry_weights(d: usize) -> &'static [f64] {
    match d {
        0 => &[],
        1 => &[1.0],
        _ => &[2.0, -1.0],
    }
}

/// One-step-ahead predictions over `levels` with frozen parameters.
///
/// Entry `i` is the forecast of `levels[i]` from `levels[..i]`; the first
/// `d + p` entries have no forecast.
pub fn one_step_path(fit: &ArimaFit, levels: &[f64]) -> Result<Vec<Option<f64>>, ArimaError> {
    let d = fit.spec.d;
    let p = fit.spec.p;
    let needed = d + p + 1;
    if levels.len() < needed {
        return Err(ArimaError::InsufficientHistory {
            needed,
            got: levels.len(),
        });
    }
    let w = series::difference(levels, d)?;
    let carry = carry_weights(d);
    let mut e = vec![0.0; w.len()];
    let mut out = vec![None; levels.len()];
    for t in p..w.len() {
        let mut what = fit.mu;
        for (i, phi) in fit.phi.iter().enumerate() {
            what += phi * w[t - 1 - i];
        }
        for (j, theta) in fit.theta.iter().enumerate().take(t) {
            what += theta * e[t - 1 - j];
        }
        e[t] = w[t] - what;
        let i = t + d;
        let base: f64 = carry.iter().enumerate().map(|(j, b)| b * levels[i - 1 - j]).sum();
        out[i] = Some(base + what);
    }
    Ok(out)
}

/// Rolling one-step forecasts for every value of `test`, each conditioned
/// on `history` plus the test values before it. Parameters stay frozen.
pub fn rolling_one_step(fit: &ArimaFit, history: &[f64], test: &[f64]) -> Result<Vec<f64>, ArimaError> {
    let mut all = history.to_vec();
    all.extend_from_slice(test);
    let needed = fit.spec.d + fit.spec.p;
    if history.len() < needed.max(1) {
        return Err(ArimaError::InsufficientHistory {
            needed: needed.max(1),
            got: history.len(),
        });
    }
    let path = one_step_path(fit, &all)?;
    Ok(path[history.len()..]
        .iter()
        .map(|v| v.expect("history covers the warm-up"))
        .collect())
}

/// Multi-step forecast from the end of `history` with future shocks zeroed.
pub fn forecast(fit: &ArimaFit, history: &[f64], horizon: usize) -> Result<Forecast, ArimaError> {
    if horizon < 1 {
        return Err(ArimaError::InvalidHorizon);
    }
    let d = fit.spec.d;
    let p = fit.spec.p;
    if history.len() < d + p.max(1) {
        return Err(ArimaError::InsufficientHistory {
            needed: d + p.max(1),
            got: history.len(),
        });
    }
    let mut w = series::difference(history, d)?;
    let mut e = if w.len() > p {
        let mut r = vec![0.0; p];
        r.extend(super::css_residuals(&w, fit.mu, &fit.phi, &fit.theta));
        r
    } else {
        vec![0.0; w.len()]
    };
    let n0 = w.len();
    for _ in 0..horizon {
        let t = w.len();
        let mut what = fit.mu;
        for (i, phi) in fit.phi.iter().enumerate() {
            if t > i {
                what += phi * w[t - 1 - i];
            }
        }
        for (j, theta) in fit.theta.iter().enumerate() {
            if t > j {
                what += theta * e[t - 1 - j];
            }
        }
        w.push(what);
        e.push(0.0);
    }
    let anchors = &history[history.len() - d..];
    let point = series::integrate(&w[n0..], d, anchors)?;
    Ok(Forecast {
        horizon,
        point,
        origin_date: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arima::{fit as fit_model, ArimaSpec, FitOptions};
    use crate::sim;

    fn manual(spec: ArimaSpec, mu: f64, phi: Vec<f64>, theta: Vec<f64>) -> ArimaFit {
        ArimaFit {
            spec,
            mu,
            phi,
            theta,
            residuals: vec![],
            sigma2: 1.0,
            css: 0.0,
            aic: 0.0,
            sic: 0.0,
        }
    }

    #[test]
    fn random_walk_forecasts() {
        let spec = ArimaSpec { p: 0, d: 1, q: 0 };
        let flat = forecast(&manual(spec, 0.0, vec![], vec![]), &[90.0, 100.0], 3).unwrap();
        assert_eq!(flat.point, vec![100.0, 100.0, 100.0]);
        let drift = forecast(&manual(spec, 2.0, vec![], vec![]), &[90.0, 100.0], 3).unwrap();
        assert_eq!(drift.point, vec![102.0, 104.0, 106.0]);
    }

    #[test]
    fn ar1_decays() {
        let spec = ArimaSpec { p: 1, d: 0, q: 0 };
        let f = forecast(&manual(spec, 0.0, vec![0.5], vec![]), &[3.0, 8.0], 3).unwrap();
        assert_eq!(f.point, vec![4.0, 2.0, 1.0]);
        assert_eq!(f.horizon, 3);
    }

    #[test]
    fn zero_horizon_rejected() {
        let spec = ArimaSpec { p: 0, d: 1, q: 0 };
        assert_eq!(
            forecast(&manual(spec, 0.0, vec![], vec![]), &[1.0, 2.0], 0),
            Err(ArimaError::InvalidHorizon)
        );
    }

    #[test]
    fn naive_rolling_equals_previous_close() {
        let spec = ArimaSpec { p: 0, d: 1, q: 0 };
        let m = manual(spec, 0.0, vec![], vec![]);
        let hist = [10.0, 11.0, 12.5];
        let test = [12.0, 13.25, 11.0];
        let r = rolling_one_step(&m, &hist, &test).unwrap();
        assert_eq!(r, vec![12.5, 12.0, 13.25]);
    }

    #[test]
    fn horizon_one_matches_path_extension() {
        let x = sim::arima(&[0.5, -0.2], &[0.3], 1, 0.05, 1.0, 600, 100.0, 4);
        let f = fit_model(&x, ArimaSpec::new(2, 1, 1).unwrap(), &FitOptions::default()).unwrap();
        let h1 = forecast(&f, &x, 1).unwrap().point[0];
        // extending the series by any value yields the same one-step predictor
        let mut ext = x.clone();
        ext.push(0.0);
        let path = one_step_path(&f, &ext).unwrap();
        assert!((path.last().unwrap().unwrap() - h1).abs() < 1e-9);
    }

    #[test]
    fn path_residuals_match_fit() {
        let x = sim::arima(&[0.4], &[0.2], 1, 0.0, 1.0, 400, 50.0, 6);
        let f = fit_model(&x, ArimaSpec::new(1, 1, 1).unwrap(), &FitOptions::default()).unwrap();
        let path = one_step_path(&f, &x).unwrap();
        assert!(path[..2].iter().all(Option::is_none));
        for (i, r) in f.residuals.iter().enumerate() {
            let idx = i + 2;
            assert!((x[idx] - path[idx].unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn rolling_beats_flat_for_ar_dynamics() {
        let x = sim::arima(&[0.6], &[], 1, 0.0, 1.0, 1200, 500.0, 12);
        let (train, test) = x.split_at(1000);
        let f = fit_model(train, ArimaSpec::new(1, 1, 0).unwrap(), &FitOptions::default()).unwrap();
        let rolling = rolling_one_step(&f, train, test).unwrap();
        let flat = vec![*train.last().unwrap(); test.len()];
        let m_roll = crate::metrics::mape(test, &rolling).unwrap();
        let m_flat = crate::metrics::mape(test, &flat).unwrap();
        assert!(m_roll < m_flat, "{m_roll} vs {m_flat}");
        assert_eq!(rolling.len(), test.len());
    }
}
