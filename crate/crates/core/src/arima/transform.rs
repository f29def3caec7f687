//! Maps unconstrained reals onto stationary (or invertible) lag polynomials
//! through partial autocorrelations, so every optimizer point is admissible.

/// Partial autocorrelations in (-1, 1) to coefficients `c` of the
/// polynomial `1 - c_1 z - ... - c_k z^k`, whose roots then lie outside the
/// unit circle.
pub fn partials_to_coefficients(partials: &[f64]) -> Vec<f64> {
    let mut coef: Vec<f64> = Vec::with_capacity(partials.len());
    for (k, &r) in partials.iter().enumerate() {
        let prev = coef.clone();
        for j in 0..k {
            coef[j] = prev[j] - r * prev[k - 1 - j];
        }
        coef.push(r);
    }
    coef
}

/// Inverse of [`partials_to_coefficients`] (step-down recursion). Returns
/// `None` when the polynomial is not stationary.
pub fn coefficients_to_partials(coef: &[f64]) -> Option<Vec<f64>> {
    let mut a = coef.to_vec();
    let mut partials = vec![0.0; coef.len()];
    for k in (0..coef.len()).rev() {
        let r = a[k];
        if r.is_nan() || r.abs() >= 1.0 {
            return None;
        }
        partials[k] = r;
        let denom = 1.0 - r * r;
        let prev = a.clone();
        for j in 0..k {
            a[j] = (prev[j] + r * prev[k - 1 - j]) / denom;
        }
        a.truncate(k);
    }
    Some(partials)
}

pub fn squash(u: f64) -> f64 {
    u.tanh()
}

pub fn unsquash(r: f64) -> f64 {
    r.clamp(-0.999_999, 0.999_999).atanh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arima::roots::all_roots_outside_unit_circle;
    use proptest::prelude::*;

    #[test]
    fn single_lag_is_identity() {
        assert_eq!(partials_to_coefficients(&[0.4]), vec![0.4]);
    }

    #[test]
    fn two_lags_match_hand_recursion() {
        // phi_1 = r1 - r2 r1, phi_2 = r2
        let c = partials_to_coefficients(&[0.5, -0.3]);
        assert!((c[0] - (0.5 + 0.3 * 0.5)).abs() < 1e-15);
        assert!((c[1] + 0.3).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn image_is_stationary_and_invertible_back(
            us in prop::collection::vec(-3.0f64..3.0, 1..6)
        ) {
            let r: Vec<f64> = us.iter().map(|&u| squash(u)).collect();
            let c = partials_to_coefficients(&r);
            prop_assert!(all_roots_outside_unit_circle(&c, 0.0));
            let back = coefficients_to_partials(&c).unwrap();
            for (a, b) in r.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }
    }
}
