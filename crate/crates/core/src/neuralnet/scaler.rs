use serde::{Deserialize, Serialize};

use super::NnError;

/// Per-column min-max map onto `[0, 1]`. Values outside the fitted range
/// map outside `[0, 1]`; nothing is clipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaler {
    pub fn fit(columns: &[&[f64]]) -> Result<Self, NnError> {
        let mut min = Vec::with_capacity(columns.len());
        let mut max = Vec::with_capacity(columns.len());
        for (j, col) in columns.iter().enumerate() {
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
                return Err(NnError::ConstantColumn(j));
            }
            min.push(lo);
            max.push(hi);
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn apply(&self, j: usize, v: f64) -> f64 {
        (v - self.min[j]) / (self.max[j] - self.min[j])
    }

    pub fn invert(&self, j: usize, v: f64) -> f64 {
        self.min[j] + v * (self.max[j] - self.min[j])
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &v)| self.apply(j, v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn maps_range_to_unit_interval() {
        let s = Scaler::fit(&[&[10.0, 20.0, 30.0]]).unwrap();
        let out: Vec<f64> = [10.0, 20.0, 30.0].iter().map(|&v| s.apply(0, v)).collect();
        assert_eq!(out, vec![0.0, 0.5, 1.0]);
        assert_eq!(s.apply(0, 40.0), 1.5);
        assert_eq!(s.apply(0, 0.0), -0.5);
    }

    #[test]
    fn constant_column_rejected() {
        assert_eq!(Scaler::fit(&[&[1.0, 2.0], &[3.0, 3.0]]), Err(NnError::ConstantColumn(1)));
    }

    proptest! {
        #[test]
        fn round_trip(col in prop::collection::vec(-1e4f64..1e4, 2..50)) {
            prop_assume!(col.iter().any(|v| (v - col[0]).abs() > 1e-3));
            let s = Scaler::fit(&[&col]).unwrap();
            for &v in &col {
                let back = s.invert(0, s.apply(0, v));
                prop_assert!((back - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }
}
