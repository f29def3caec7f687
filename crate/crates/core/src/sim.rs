//! Seeded generators for white noise, random walks and ARIMA processes.
//!
//! Everything is driven by ChaCha8 so that a seed yields the same sample
//! on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const BURN_IN: usize = 200;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize, sigma: f64) -> Vec<f64> {
    let dist = Normal::new(0.0, sigma).expect("sigma must be positive and finite");
    (0..n).map(|_| dist.sample(rng)).collect()
}

pub fn white_noise(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    normals(&mut rng(seed), n, sigma)
}

/// Cumulative sum of `drift + N(0, sigma)` steps starting at zero.
pub fn random_walk(n: usize, drift: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let mut level = 0.0;
    white_noise(n, sigma, seed)
        .into_iter()
        .map(|e| {
            level += drift + e;
            level
        })
        .collect()
}

/// Stationary ARMA sample `w_t = mu + Σ φ_i w_{t-i} + e_t + Σ θ_j e_{t-j}`
/// after discarding a burn-in.
pub fn arma(phi: &[f64], theta: &[f64], mu: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    let total = n + BURN_IN;
    let shocks = white_noise(total, sigma, seed);
    let mut w = vec![0.0; total];
    for t in 0..total {
        let mut v = mu + shocks[t];
        for (i, p) in phi.iter().enumerate() {
            if t > i {
                v += p * w[t - 1 - i];
            }
        }
        for (j, q) in theta.iter().enumerate() {
            if t > j {
                v += q * shocks[t - 1 - j];
            }
        }
        w[t] = v;
    }
    w.split_off(BURN_IN)
}

/// ARIMA sample of `n` levels: an ARMA sample integrated `d` times from `start`.
#[allow(clippy::too_many_arguments)]
pub fn arima(
    phi: &[f64],
    theta: &[f64],
    d: usize,
    mu: f64,
    sigma: f64,
    n: usize,
    start: f64,
    seed: u64,
) -> Vec<f64> {
    let mut out = arma(phi, theta, mu, sigma, n, seed);
    for _ in 0..d {
        let mut acc = start;
        for v in out.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    out
}
