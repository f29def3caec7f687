//! Univariate series operations backing the Box–Jenkins workflow:
//! differencing and its inverse, correlograms, a stationarity heuristic
//! and the Ljung–Box whiteness test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

/// z-value of the two-sided 95% correlogram band.
pub const BAND_Z: f64 = 1.96;

/// Lag-1 autocorrelation at or above which a series is treated as non-stationary.
pub const DEFAULT_STATIONARITY_THRESHOLD: f64 = 0.95;

/// p-value above which residuals are accepted as white noise.
pub const WHITENESS_ALPHA: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series too short: need {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("differencing order {0} not in 0..=2")]
    InvalidOrder(usize),
    #[error("expected {expected} anchor value(s), got {got}")]
    AnchorMismatch { expected: usize, got: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("max lag must be >= 1")]
    ZeroLag,
    #[error("Ljung-Box needs lags > fitted parameters ({lags} <= {fitted})")]
    NoDegreesOfFreedom { lags: usize, fitted: usize },
}

/// Finite, non-empty observations plus how many times they were differenced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
    level: usize,
    label: Option<String>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::TooShort { needed: 1, got: 0 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite);
        }
        Ok(Self {
            values,
            level: 0,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of differencing passes already applied.
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn difference(&self, d: usize) -> Result<Series, SeriesError> {
        if self.level + d > 2 {
            return Err(SeriesError::InvalidOrder(self.level + d));
        }
        Ok(Series {
            values: difference(&self.values, d)?,
            level: self.level + d,
            label: self.label.clone(),
        })
    }

    /// Undoes all differencing given the last `level` original values
    /// preceding the first element.
    pub fn integrate(&self, anchors: &[f64]) -> Result<Vec<f64>, SeriesError> {
        integrate(&self.values, self.level, anchors)
    }
}

impl std::ops::Deref for Series {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Applies `d` first-difference passes; output has `len - d` values.
pub fn difference(values: &[f64], d: usize) -> Result<Vec<f64>, SeriesError> {
    if d > 2 {
        return Err(SeriesError::InvalidOrder(d));
    }
    if values.len() <= d {
        return Err(SeriesError::TooShort {
            needed: d + 1,
            got: values.len(),
        });
    }
    let mut out = values.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Inverse of [`difference`]. `anchors` are the `d` original values that
/// immediately precede the first differenced value, oldest first.
pub fn integrate(diffs: &[f64], d: usize, anchors: &[f64]) -> Result<Vec<f64>, SeriesError> {
    if d > 2 {
        return Err(SeriesError::InvalidOrder(d));
    }
    if anchors.len() != d {
        return Err(SeriesError::AnchorMismatch {
            expected: d,
            got: anchors.len(),
        });
    }
    // starts[j] = last value of the j-times differenced anchors
    let mut starts = Vec::with_capacity(d);
    let mut level = anchors.to_vec();
    for _ in 0..d {
        starts.push(*level.last().expect("non-empty by construction"));
        level = level.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let mut cur = diffs.to_vec();
    for &start in starts.iter().rev() {
        let mut acc = start;
        for v in cur.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    Ok(cur)
}

/// Correlogram over lags `1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelogramResult {
    pub lags: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// Half-width of the 95% band, `1.96 / sqrt(n)`.
    pub band: f64,
}

impl CorrelogramResult {
    pub fn get(&self, lag: usize) -> Option<f64> {
        lag.checked_sub(1).and_then(|i| self.coefficients.get(i).copied())
    }

    /// Lags whose coefficient lies outside the band.
    pub fn significant_lags(&self) -> Vec<usize> {
        self.lags
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, c)| c.abs() > self.band)
            .map(|(&l, _)| l)
            .collect()
    }

    /// Largest lag outside the band, or 0 when every lag is inside it.
    pub fn cutoff_lag(&self) -> usize {
        self.significant_lags().last().copied().unwrap_or(0)
    }
}

fn check_lag(n: usize, max_lag: usize) -> Result<(), SeriesError> {
    if max_lag == 0 {
        return Err(SeriesError::ZeroLag);
    }
    if n <= max_lag {
        return Err(SeriesError::TooShort {
            needed: max_lag + 1,
            got: n,
        });
    }
    Ok(())
}

/// Biased (divide-by-n, common mean) autocovariances for lags `0..=max_lag`.
pub(crate) fn autocovariances(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    (0..=max_lag)
        .map(|k| dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect()
}

/// Sample autocorrelation function.
pub fn acf(values: &[f64], max_lag: usize) -> Result<CorrelogramResult, SeriesError> {
    check_lag(values.len(), max_lag)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SeriesError::NonFinite);
    }
    let gamma = autocovariances(values, max_lag);
    if gamma[0] <= 0.0 {
        return Err(SeriesError::ZeroVariance);
    }
    let coefficients = gamma[1..].iter().map(|g| (g / gamma[0]).clamp(-1.0, 1.0)).collect();
    Ok(CorrelogramResult {
        lags: (1..=max_lag).collect(),
        coefficients,
        band: BAND_Z / (values.len() as f64).sqrt(),
    })
}

/// Partial autocorrelations via the Durbin–Levinson recursion on the ACF.
pub fn pacf(values: &[f64], max_lag: usize) -> Result<CorrelogramResult, SeriesError> {
    let r = acf(values, max_lag)?;
    let coefficients = durbin_levinson(&r.coefficients);
    Ok(CorrelogramResult {
        coefficients,
        ..r
    })
}

/// Given autocorrelations `rho[0..K]` for lags `1..=K`, returns the
/// partial autocorrelations for lags `1..=K`.
pub fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let k_max = rho.len();
    let mut out = Vec::with_capacity(k_max);
    let mut phi: Vec<f64> = Vec::with_capacity(k_max);
    let mut v = 1.0;
    for k in 0..k_max {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        let kappa = if v > 0.0 { (num / v).clamp(-1.0, 1.0) } else { 0.0 };
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - kappa * prev[k - 1 - j];
        }
        phi.push(kappa);
        v *= 1.0 - kappa * kappa;
        out.push(kappa);
    }
    out
}

/// Smallest `d` in `0..=2` whose differenced series has lag-1 ACF below
/// `threshold`. A differenced series with zero variance counts as stationary.
pub fn suggest_d(values: &[f64], threshold: f64) -> Result<usize, SeriesError> {
    if values.len() < 30 {
        return Err(SeriesError::TooShort {
            needed: 30,
            got: values.len(),
        });
    }
    for d in 0..=2 {
        let diffed = difference(values, d)?;
        match acf(&diffed, 1) {
            Ok(r) if r.coefficients[0] < threshold => return Ok(d),
            Ok(_) => continue,
            Err(SeriesError::ZeroVariance) => return Ok(d),
            Err(e) => return Err(e),
        }
    }
    Ok(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitenessReport {
    /// Ljung–Box Q.
    pub statistic: f64,
    pub lags: usize,
    pub dof: usize,
    pub p_value: f64,
    /// `p_value > 0.05`.
    pub white: bool,
}

/// Ljung–Box portmanteau test with `lags - fitted_params` degrees of freedom.
pub fn ljung_box(
    residuals: &[f64],
    lags: usize,
    fitted_params: usize,
) -> Result<WhitenessReport, SeriesError> {
    if lags <= fitted_params {
        return Err(SeriesError::NoDegreesOfFreedom {
            lags,
            fitted: fitted_params,
        });
    }
    let r = acf(residuals, lags)?;
    let n = residuals.len() as f64;
    let statistic = n
        * (n + 2.0)
        * r.coefficients
            .iter()
            .enumerate()
            .map(|(i, rho)| rho * rho / (n - (i + 1) as f64))
            .sum::<f64>();
    let dof = lags - fitted_params;
    let chi = ChiSquared::new(dof as f64).expect("dof >= 1");
    let p_value = (1.0 - chi.cdf(statistic)).clamp(0.0, 1.0);
    Ok(WhitenessReport {
        statistic,
        lags,
        dof,
        p_value,
        white: p_value > WHITENESS_ALPHA,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;
    use proptest::prelude::*;

    #[test]
    fn first_difference() {
        assert_eq!(difference(&[5.0, 7.0, 4.0, 9.0], 1).unwrap(), vec![2.0, -3.0, 5.0]);
        let s = [1.5, -2.0, 3.25];
        assert_eq!(difference(&s, 0).unwrap(), s.to_vec());
        assert_eq!(
            difference(&[1.0, 2.0], 2),
            Err(SeriesError::TooShort { needed: 3, got: 2 })
        );
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(integrate(&[2.0, -3.0, 5.0], 1, &[5.0]).unwrap(), vec![7.0, 4.0, 9.0]);
        assert_eq!(integrate(&[], 1, &[3.0]).unwrap(), Vec::<f64>::new());
        assert_eq!(
            integrate(&[1.0], 1, &[1.0, 2.0]),
            Err(SeriesError::AnchorMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn series_wrapper_tracks_level() {
        let s = Series::new(vec![1.0, 4.0, 9.0, 16.0, 25.0]).unwrap();
        let d2 = s.difference(1).unwrap().difference(1).unwrap();
        assert_eq!(d2.level(), 2);
        assert_eq!(d2.values(), &[2.0, 2.0, 2.0]);
        assert_eq!(d2.integrate(&[1.0, 4.0]).unwrap(), vec![9.0, 16.0, 25.0]);
        assert!(d2.difference(1).is_err());
        assert!(Series::new(vec![f64::NAN]).is_err());
        assert!(Series::new(vec![]).is_err());
    }

    #[test]
    fn acf_of_ramp() {
        let r = acf(&[1.0, 2.0, 3.0, 4.0, 5.0], 1).unwrap();
        assert!((r.coefficients[0] - 0.4).abs() < 1e-15);
        let p = pacf(&[1.0, 2.0, 3.0, 4.0, 5.0], 1).unwrap();
        assert!((p.coefficients[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn acf_errors() {
        assert_eq!(acf(&[2.0; 10], 3), Err(SeriesError::ZeroVariance));
        assert!(matches!(acf(&[1.0, 2.0, 3.0], 3), Err(SeriesError::TooShort { .. })));
        assert_eq!(acf(&[1.0, 2.0, 3.0], 0), Err(SeriesError::ZeroLag));
    }

    #[test]
    fn white_noise_acf_inside_band() {
        let x = sim::white_noise(5000, 1.0, 11);
        let r = acf(&x, 20).unwrap();
        let bound = 3.0 / (5000f64).sqrt();
        assert!(r.coefficients.iter().all(|c| c.abs() < bound), "{:?}", r.coefficients);
    }

    #[test]
    fn ar1_pacf_cuts_off() {
        let x = sim::arma(&[0.5], &[], 0.0, 1.0, 5000, 7);
        let p = pacf(&x, 10).unwrap();
        assert!((p.coefficients[0] - 0.5).abs() < 0.05);
        let bound = 3.0 / (5000f64).sqrt();
        for c in &p.coefficients[1..] {
            assert!(c.abs() < bound, "{c}");
        }
    }

    #[test]
    fn cutoff_rule() {
        let r = CorrelogramResult {
            lags: vec![1, 2, 3, 4],
            coefficients: vec![0.5, -0.3, 0.01, 0.02],
            band: 0.1,
        };
        assert_eq!(r.cutoff_lag(), 2);
        assert_eq!(r.significant_lags(), vec![1, 2]);
    }

    #[test]
    fn suggest_d_cases() {
        let walk = sim::random_walk(1000, 0.0, 1.0, 3);
        assert_eq!(suggest_d(&walk, DEFAULT_STATIONARITY_THRESHOLD).unwrap(), 1);
        let noise = sim::white_noise(1000, 1.0, 3);
        assert_eq!(suggest_d(&noise, DEFAULT_STATIONARITY_THRESHOLD).unwrap(), 0);
        let ramp: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(suggest_d(&ramp, DEFAULT_STATIONARITY_THRESHOLD).unwrap(), 1);
        assert!(suggest_d(&ramp[..10], 0.95).is_err());
    }

    #[test]
    fn ljung_box_verdicts() {
        let noise = sim::white_noise(2000, 1.0, 5);
        assert!(ljung_box(&noise, 20, 0).unwrap().white);
        let ar = sim::arma(&[0.8], &[], 0.0, 1.0, 2000, 5);
        let rep = ljung_box(&ar, 20, 0).unwrap();
        assert!(!rep.white);
        assert!(rep.p_value < 1e-6);
        assert_eq!(
            ljung_box(&noise, 5, 5),
            Err(SeriesError::NoDegreesOfFreedom { lags: 5, fitted: 5 })
        );
        assert_eq!(ljung_box(&[1.0; 50], 5, 0), Err(SeriesError::ZeroVariance));
    }

    proptest! {
        #[test]
        fn acf_bounded_and_affine_invariant(
            xs in prop::collection::vec(-1e3f64..1e3, 20..80),
            shift in -1e3f64..1e3,
            scale in 0.01f64..100.0,
        ) {
            prop_assume!(xs.iter().any(|x| (x - xs[0]).abs() > 1e-6));
            let a = acf(&xs, 5).unwrap();
            let ys: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            let b = acf(&ys, 5).unwrap();
            for (u, v) in a.coefficients.iter().zip(&b.coefficients) {
                prop_assert!(u.abs() <= 1.0);
                prop_assert!((u - v).abs() < 1e-8);
            }
            let p = pacf(&xs, 5).unwrap();
            prop_assert!(p.coefficients.iter().all(|c| c.abs() <= 1.0));
        }

        #[test]
        fn ljung_box_monotone_in_lags(xs in prop::collection::vec(-10f64..10.0, 40..100)) {
            prop_assume!(xs.iter().any(|x| (x - xs[0]).abs() > 1e-6));
            let mut prev = 0.0;
            for lags in 1..10 {
                let q = ljung_box(&xs, lags, 0).unwrap().statistic;
                prop_assert!(q >= prev);
                prev = q;
            }
        }

        #[test]
        fn price_like_first_difference_roundtrips(
            start in 1.0f64..1e4,
            steps in prop::collection::vec(-0.05f64..0.05, 1..60),
        ) {
            // consecutive values within a factor of two: subtraction is exact
            let mut xs = vec![start];
            for s in steps {
                let last = *xs.last().unwrap();
                xs.push(last * (1.0 + s));
            }
            let d = difference(&xs, 1).unwrap();
            prop_assert_eq!(integrate(&d, 1, &xs[..1]).unwrap(), xs[1..].to_vec());
        }
    }
}
