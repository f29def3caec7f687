use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, RegressionError, SelectionCriterion};
use crate::linalg;
use crate::metrics::AccuracyReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub included: Vec<String>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub sse: f64,
    pub bic: f64,
    pub aic: f64,
    pub n: usize,
    /// Included columns plus the intercept.
    pub k: usize,
}

impl RegressionFit {
    pub fn criterion(&self, c: SelectionCriterion) -> f64 {
        match c {
            SelectionCriterion::Bic => self.bic,
            SelectionCriterion::Aic => self.aic,
        }
    }

    pub fn predict(&self, m: &FeatureMatrix) -> Result<Vec<f64>, RegressionError> {
        let cols = self
            .included
            .iter()
            .map(|name| {
                m.column(name)
                    .ok_or_else(|| RegressionError::MissingColumn(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((0..m.n_rows())
            .map(|i| {
                self.intercept
                    + cols
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(c, b)| c[i] * b)
                        .sum::<f64>()
            })
            .collect())
    }

    /// `y = 0.4360·x1 - 0.2430·x3 + 12.3456`
    pub fn equation(&self) -> String {
        let mut s = String::from("y = ");
        for (i, (name, b)) in self.included.iter().zip(&self.coefficients).enumerate() {
            if i == 0 {
                let _ = write!(s, "{b:.4}·{name}");
            } else {
                let sign = if *b < 0.0 { '-' } else { '+' };
                let _ = write!(s, " {sign} {:.4}·{name}", b.abs());
            }
        }
        if self.included.is_empty() {
            let _ = write!(s, "{:.4}", self.intercept);
        } else {
            let sign = if self.intercept < 0.0 { '-' } else { '+' };
            let _ = write!(s, " {sign} {:.4}", self.intercept.abs());
        }
        s
    }
}

/// Least-squares fit of the target on an intercept plus `subset`.
pub fn ols<S: AsRef<str>>(m: &FeatureMatrix, subset: &[S]) -> Result<RegressionFit, RegressionError> {
    let n = m.n_rows();
    let k = subset.len() + 1;
    if n < subset.len() + 2 {
        return Err(RegressionError::TooFewRows {
            rows: n,
            needed: subset.len() + 2,
        });
    }
    let mut design = vec![vec![1.0; n]];
    let mut names = Vec::with_capacity(subset.len());
    for s in subset {
        let s = s.as_ref();
        if names.iter().any(|x: &String| x == s) {
            return Err(RegressionError::RankDeficient {
                columns: vec![s.to_string()],
            });
        }
        design.push(
            m.column(s)
                .ok_or_else(|| RegressionError::MissingColumn(s.to_string()))?
                .to_vec(),
        );
        names.push(s.to_string());
    }
    let sol = linalg::lstsq(&design, m.target()).map_err(|d| RegressionError::RankDeficient {
        columns: d
            .dependent
            .iter()
            .map(|&j| if j == 0 { "intercept".to_string() } else { names[j - 1].clone() })
            .collect(),
    })?;
    let sse: f64 = sol.residuals.iter().map(|r| r * r).sum();
    let nf = n as f64;
    let (bic, aic) = if sse == 0.0 {
        (f64::NEG_INFINITY, f64::NEG_INFINITY)
    } else {
        let base = nf * (sse / nf).ln();
        (base + k as f64 * nf.ln(), base + 2.0 * k as f64)
    };
    Ok(RegressionFit {
        included: names,
        intercept: sol.coef[0],
        coefficients: sol.coef[1..].to_vec(),
        sse,
        bic,
        aic,
        n,
        k,
    })
}

/// Predicts `test` and scores it with MAPE.
pub fn evaluate(fit: &RegressionFit, test: &FeatureMatrix) -> Result<AccuracyReport, RegressionError> {
    let predicted = fit.predict(test)?;
    Ok(AccuracyReport::new(
        test.dates().to_vec(),
        test.target().to_vec(),
        predicted,
    )?)
}
