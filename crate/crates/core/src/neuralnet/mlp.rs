use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{NnError, Scaler};
use crate::metrics::AccuracyReport;
use crate::regression::FeatureMatrix;
use crate::sim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
}

/// One hidden ReLU layer and a linear output unit:
/// `out = W_out · relu(W_in x + b_in) + b_out`, in scaled space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// Input column names, in the order the model expects them.
    pub schema: Vec<String>,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub activation: Activation,
    /// `hidden_dim × input_dim`, row-major.
    pub weights_in: Vec<f64>,
    pub bias_in: Vec<f64>,
    pub weights_out: Vec<f64>,
    pub bias_out: f64,
    pub input_scaler: Scaler,
    pub target_scaler: Scaler,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn init(
        schema: Vec<String>,
        hidden_dim: usize,
        input_scaler: Scaler,
        target_scaler: Scaler,
        seed: u64,
    ) -> Self {
        let input_dim = schema.len();
        let mut rng = sim::rng(seed);
        let lim_in = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        let lim_out = (6.0 / (hidden_dim + 1) as f64).sqrt();
        let weights_in = (0..hidden_dim * input_dim)
            .map(|_| rng.random_range(-lim_in..lim_in))
            .collect();
        let weights_out = (0..hidden_dim).map(|_| rng.random_range(-lim_out..lim_out)).collect();
        Self {
            schema,
            input_dim,
            hidden_dim,
            activation: Activation::Relu,
            weights_in,
            bias_in: vec![0.0; hidden_dim],
            weights_out,
            bias_out: 0.0,
            input_scaler,
            target_scaler,
        }
    }

    pub fn n_params(&self) -> usize {
        self.hidden_dim * self.input_dim + 2 * self.hidden_dim + 1
    }

    /// Flattened parameters: `weights_in, bias_in, weights_out, bias_out`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend(&self.weights_in);
        p.extend(&self.bias_in);
        p.extend(&self.weights_out);
        p.push(self.bias_out);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params(), "parameter vector length");
        let (wi, rest) = p.split_at(self.weights_in.len());
        let (bi, rest) = rest.split_at(self.hidden_dim);
        let (wo, bo) = rest.split_at(self.hidden_dim);
        self.weights_in.copy_from_slice(wi);
        self.bias_in.copy_from_slice(bi);
        self.weights_out.copy_from_slice(wo);
        self.bias_out = bo[0];
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden_dim)
            .map(|h| {
                let row = &self.weights_in[h * self.input_dim..(h + 1) * self.input_dim];
                self.bias_in[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    fn output(&self, pre: &[f64]) -> f64 {
        self.bias_out
            + pre
                .iter()
                .zip(&self.weights_out)
                .map(|(z, w)| z.max(0.0) * w)
                .sum::<f64>()
    }

    /// Scaled-space prediction for one scaled input row.
    pub fn forward(&self, x: &[f64]) -> Result<f64, NnError> {
        if x.len() != self.input_dim {
            return Err(NnError::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(self.output(&self.hidden(x)))
    }

    /// Mean squared error over scaled rows.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (self.output(&self.hidden(x)) - y).powi(2))
            .sum::<f64>()
            / xs.len() as f64
    }

    /// Backpropagated gradient of [`MlpModel::loss`], laid out like
    /// [`MlpModel::params`].
    pub fn gradient(&self, xs: &[Vec<f64>], ys: &[f64]) -> Vec<f64> {
        let (ni, nh) = (self.input_dim, self.hidden_dim);
        let mut g = vec![0.0; self.n_params()];
        let scale = 2.0 / xs.len() as f64;
        let (g_wi, rest) = g.split_at_mut(nh * ni);
        let (g_bi, rest) = rest.split_at_mut(nh);
        let (g_wo, g_bo) = rest.split_at_mut(nh);
        for (x, y) in xs.iter().zip(ys) {
            let pre = self.hidden(x);
            let err = scale * (self.output(&pre) - y);
            g_bo[0] += err;
            for h in 0..nh {
                if pre[h] > 0.0 {
                    g_wo[h] += err * pre[h];
                    let back = err * self.weights_out[h];
                    g_bi[h] += back;
                    for (gw, xi) in g_wi[h * ni..(h + 1) * ni].iter_mut().zip(x) {
                        *gw += back * xi;
                    }
                }
            }
        }
        g
    }

    /// Price-space prediction for one raw input row.
    pub fn predict_row(&self, raw: &[f64]) -> Result<f64, NnError> {
        let scaled = self.input_scaler.apply_row(raw);
        Ok(self.target_scaler.invert(0, self.forward(&scaled)?))
    }

    fn check_schema(&self, m: &FeatureMatrix) -> Result<(), NnError> {
        if m.names() != self.schema.as_slice() {
            return Err(NnError::SchemaMismatch {
                expected: self.schema.clone(),
                got: m.names().to_vec(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, m: &FeatureMatrix) -> Result<Vec<f64>, NnError> {
        self.check_schema(m)?;
        (0..m.n_rows()).map(|i| self.predict_row(&m.row(i))).collect()
    }

    /// Predictions inverted to price space and scored with MAPE.
    pub fn evaluate(&self, test: &FeatureMatrix) -> Result<AccuracyReport, NnError> {
        let predicted = self.predict(test)?;
        Ok(AccuracyReport::new(
            test.dates().to_vec(),
            test.target().to_vec(),
            predicted,
        )?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, NnError> {
        let m: Self = serde_json::from_str(s).map_err(|e| NnError::Io(e.to_string()))?;
        let ok = m.weights_in.len() == m.hidden_dim * m.input_dim
            && m.bias_in.len() == m.hidden_dim
            && m.weights_out.len() == m.hidden_dim
            && m.schema.len() == m.input_dim
            && m.input_scaler.dim() == m.input_dim
            && m.target_scaler.dim() == 1;
        if !ok {
            return Err(NnError::Io("inconsistent model dimensions".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NnError> {
        std::fs::write(path, self.to_json()).map_err(|e| NnError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NnError> {
        let s = std::fs::read_to_string(path).map_err(|e| NnError::Io(e.to_string()))?;
        Self::from_json(&s)
    }
}
