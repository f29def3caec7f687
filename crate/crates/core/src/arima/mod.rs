//! ARIMA(p,d,q) estimation by conditional sum of squares.
//!
//! The model on the `d`-times differenced series `w_t` is
//!
//! ```text
//! w_t = mu + Σ φ_i w_{t-i} + e_t + Σ θ_j e_{t-j}
//! ```
//!
//! with pre-sample shocks set to zero. AR and MA coefficients are searched
//! through a partial-autocorrelation reparameterization, so every candidate
//! the simplex visits is stationary and invertible.

mod forecast;
pub mod roots;
pub mod simplex;
pub mod transform;

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{self, SeriesError, WhitenessReport};
use crate::sim;

pub use forecast::{forecast, one_step_path, rolling_one_step, Forecast};
use simplex::SimplexOptions;

/// Largest admissible `p + q`.
pub const MAX_ARMA_TERMS: usize = 5;

/// Polynomial roots must have modulus above `1 + ROOT_MARGIN`.
pub const ROOT_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArimaError {
    #[error("invalid order {0}: need d <= 2 and p + q <= {MAX_ARMA_TERMS}")]
    InvalidSpec(ArimaSpec),
    #[error("series too short for {spec}: need {needed}, got {got}")]
    TooShort {
        spec: ArimaSpec,
        needed: usize,
        got: usize,
    },
    #[error("{spec}: no convergence within {max_iter} iterations after {attempts} start(s)")]
    NonConvergence {
        spec: ArimaSpec,
        max_iter: usize,
        attempts: usize,
    },
    #[error("{spec}: fitted polynomial has a root within the unit-circle margin")]
    NotAdmissible { spec: ArimaSpec },
    #[error("{spec}: degenerate residual variance")]
    DegenerateVariance { spec: ArimaSpec },
    #[error("every candidate order failed to fit (max_p = {max_p}, max_q = {max_q})")]
    AllCandidatesFailed { max_p: usize, max_q: usize },
    #[error("forecast horizon must be >= 1")]
    InvalidHorizon,
    #[error("need at least {needed} history values, got {got}")]
    InsufficientHistory { needed: usize, got: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaSpec {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self, ArimaError> {
        let spec = Self { p, d, q };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ArimaError> {
        if self.d > 2 || self.p + self.q > MAX_ARMA_TERMS {
            Err(ArimaError::InvalidSpec(*self))
        } else {
            Ok(())
        }
    }

    /// Parameters counted by the information criteria: mu, AR and MA terms.
    pub fn n_params(&self) -> usize {
        self.p + self.q + 1
    }

    pub fn min_length(&self) -> usize {
        10 * self.n_params()
    }
}

impl fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ARIMA({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    Sic,
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Self::Aic),
            "sic" | "bic" => Ok(Self::Sic),
            other => Err(format!("unknown criterion `{other}` (expected aic or sic)")),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Aic => "aic",
            Self::Sic => "sic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Simplex iteration budget per start.
    pub max_iter: usize,
    /// Perturbed restarts tried after a failed first start.
    pub restarts: usize,
    /// Seeds the restart perturbations.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            restarts: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub spec: ArimaSpec,
    pub mu: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// One-step residuals on the differenced scale, from index `p` onward.
    pub residuals: Vec<f64>,
    pub sigma2: f64,
    /// Conditional sum of squares at the optimum.
    pub css: f64,
    pub aic: f64,
    pub sic: f64,
}

impl ArimaFit {
    pub fn n_eff(&self) -> usize {
        self.residuals.len()
    }

    pub fn criterion(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Aic => self.aic,
            Criterion::Sic => self.sic,
        }
    }

    /// Ljung–Box on the residuals with `p + q` fitted parameters.
    pub fn whiteness(&self, lags: usize) -> Result<WhitenessReport, SeriesError> {
        series::ljung_box(&self.residuals, lags, self.spec.p + self.spec.q)
    }

    fn from_residuals(
        spec: ArimaSpec,
        mu: f64,
        phi: Vec<f64>,
        theta: Vec<f64>,
        residuals: Vec<f64>,
    ) -> Result<Self, ArimaError> {
        let n = residuals.len() as f64;
        let css: f64 = residuals.iter().map(|e| e * e).sum();
        let sigma2 = css / n;
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(ArimaError::DegenerateVariance { spec });
        }
        let k = spec.n_params() as f64;
        Ok(Self {
            spec,
            mu,
            phi,
            theta,
            residuals,
            sigma2,
            css,
            aic: n * sigma2.ln() + 2.0 * k,
            sic: n * sigma2.ln() + k * n.ln(),
        })
    }
}

/// One-step residuals of the ARMA recursion on `w`, starting at index `p`.
pub(crate) fn css_residuals(w: &[f64], mu: f64, phi: &[f64], theta: &[f64]) -> Vec<f64> {
    let p = phi.len();
    let q = theta.len();
    let mut e = vec![0.0; w.len()];
    for t in p..w.len() {
        let mut pred = mu;
        for i in 0..p {
            pred += phi[i] * w[t - 1 - i];
        }
        for j in 0..q.min(t) {
            pred += theta[j] * e[t - 1 - j];
        }
        e[t] = w[t] - pred;
    }
    e.split_off(p)
}

struct Layout {
    p: usize,
    mu_center: f64,
    mu_scale: f64,
}

impl Layout {
    fn decode(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let mu = self.mu_center + self.mu_scale * x[0];
        let ar: Vec<f64> = x[1..1 + self.p].iter().map(|&u| transform::squash(u)).collect();
        let ma: Vec<f64> = x[1 + self.p..].iter().map(|&u| transform::squash(u)).collect();
        let phi = transform::partials_to_coefficients(&ar);
        // 1 + Σ θ z^j is invertible iff 1 - Σ (-θ) z^j is stationary
        let theta = transform::partials_to_coefficients(&ma)
            .into_iter()
            .map(|c| -c)
            .collect();
        (mu, phi, theta)
    }
}

/// Fits `spec` to the level series `train` by conditional sum of squares.
pub fn fit(train: &[f64], spec: ArimaSpec, opts: &FitOptions) -> Result<ArimaFit, ArimaError> {
    spec.validate()?;
    if train.iter().any(|v| !v.is_finite()) {
        return Err(SeriesError::NonFinite.into());
    }
    if train.len() < spec.min_length() {
        return Err(ArimaError::TooShort {
            spec,
            needed: spec.min_length(),
            got: train.len(),
        });
    }
    let w = series::difference(train, spec.d)?;
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;

    if spec.p == 0 && spec.q == 0 {
        let residuals = w.iter().map(|v| v - mean).collect();
        return ArimaFit::from_residuals(spec, mean, vec![], vec![], residuals);
    }

    let sd = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        return Err(ArimaError::DegenerateVariance { spec });
    }
    let layout = Layout {
        p: spec.p,
        mu_center: mean,
        mu_scale: sd,
    };
    let objective = |x: &[f64]| {
        let (mu, phi, theta) = layout.decode(x);
        let e = css_residuals(&w, mu, &phi, &theta);
        e.iter().map(|v| v * v).sum::<f64>() / (sd * sd * e.len() as f64)
    };
    let dim = 1 + spec.p + spec.q;
    let steps = vec![0.1; dim];
    let sopts = SimplexOptions {
        max_iter: opts.max_iter,
        ..Default::default()
    };

    let mut rng = sim::rng(opts.seed ^ ((spec.p as u64) << 8 | spec.q as u64));
    let jitter = Normal::new(0.0, 0.5).expect("valid");
    let mut best: Option<simplex::SimplexResult> = None;
    let attempts = 1 + opts.restarts;
    for attempt in 0..attempts {
        let start: Vec<f64> = if attempt == 0 {
            vec![0.0; dim]
        } else {
            (0..dim).map(|_| jitter.sample(&mut rng)).collect()
        };
        let first = simplex::minimize(objective, &start, &steps, sopts);
        // a fresh simplex around the first optimum guards against collapse
        let polished = simplex::minimize(objective, &first.x, &steps, sopts);
        let candidate = if polished.fx <= first.fx { polished } else { first };
        let done = candidate.converged;
        if best.as_ref().is_none_or(|b| candidate.fx < b.fx) {
            best = Some(candidate);
        }
        if done {
            break;
        }
    }
    let best = best.expect("at least one attempt");
    if !best.converged {
        return Err(ArimaError::NonConvergence {
            spec,
            max_iter: opts.max_iter,
            attempts,
        });
    }

    let (mu, phi, theta) = layout.decode(&best.x);
    let neg_theta: Vec<f64> = theta.iter().map(|t| -t).collect();
    if !roots::all_roots_outside_unit_circle(&phi, ROOT_MARGIN)
        || !roots::all_roots_outside_unit_circle(&neg_theta, ROOT_MARGIN)
    {
        return Err(ArimaError::NotAdmissible { spec });
    }
    let residuals = css_residuals(&w, mu, &phi, &theta);
    ArimaFit::from_residuals(spec, mu, phi, theta, residuals)
}

/// Result of one grid cell in [`search_orders`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub spec: ArimaSpec,
    pub aic: Option<f64>,
    pub sic: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSearch {
    pub criterion: Criterion,
    pub candidates: Vec<Candidate>,
    pub best: ArimaFit,
}

/// Fits every admissible `(p, q)` with `p <= max_p`, `q <= max_q` and
/// returns the one minimizing `criterion`. Ties go to the smaller `p + q`,
/// then the smaller `p`.
pub fn search_orders(
    train: &[f64],
    d: usize,
    max_p: usize,
    max_q: usize,
    criterion: Criterion,
    opts: &FitOptions,
) -> Result<OrderSearch, ArimaError> {
    let cells: Vec<ArimaSpec> = (0..=max_p)
        .flat_map(|p| (0..=max_q).map(move |q| ArimaSpec { p, d, q }))
        .filter(|s| s.validate().is_ok())
        .collect();
    let fits: Vec<(ArimaSpec, Result<ArimaFit, ArimaError>)> = cells
        .par_iter()
        .map(|&s| (s, fit(train, s, opts)))
        .collect();

    let mut best: Option<&ArimaFit> = None;
    for (_, r) in &fits {
        let Ok(f) = r else { continue };
        let better = match best {
            None => true,
            Some(b) => {
                let (cf, cb) = (f.criterion(criterion), b.criterion(criterion));
                let key = |s: &ArimaSpec| (s.p + s.q, s.p);
                cf < cb || (cf == cb && key(&f.spec) < key(&b.spec))
            }
        };
        if better {
            best = Some(f);
        }
    }
    let best = best
        .cloned()
        .ok_or(ArimaError::AllCandidatesFailed { max_p, max_q })?;
    let candidates = fits
        .into_iter()
        .map(|(spec, r)| match r {
            Ok(f) => Candidate {
                spec,
                aic: Some(f.aic),
                sic: Some(f.sic),
                error: None,
            },
            Err(e) => Candidate {
                spec,
                aic: None,
                sic: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(OrderSearch {
        criterion,
        candidates,
        best,
    })
}

/// [`search_orders`] returning only the winning fit.
pub fn select_order(
    train: &[f64],
    d: usize,
    max_p: usize,
    max_q: usize,
    criterion: Criterion,
    opts: &FitOptions,
) -> Result<ArimaFit, ArimaError> {
    search_orders(train, d, max_p, max_q, criterion, opts).map(|s| s.best)
}
