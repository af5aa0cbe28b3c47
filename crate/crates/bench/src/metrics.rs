//! Noise injection and recovery metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{BenchError, Result};

/// NMSE at or below this value counts as exact recovery.
pub const SUCCESS_THRESHOLD: f64 = 1e-6;

/// Adds white Gaussian noise to `z = A x` at `snr_db`, where
/// `SNR = 10 log10(‖z‖² / (M σ²))`. `None` means noiseless. Returns `(y, σ²)`.
pub fn add_noise(z: &[f64], snr_db: Option<f64>, seed: u64) -> Result<(Vec<f64>, f64)> {
    let Some(snr_db) = snr_db.filter(|s| s.is_finite()) else {
        return Ok((z.to_vec(), 0.0));
    };
    let energy: f64 = z.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(BenchError::ZeroSignal);
    }
    let sigma2 = energy / (z.len() as f64 * 10f64.powf(snr_db / 10.0));
    let sigma = sigma2.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = z
        .iter()
        .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok((y, sigma2))
}

/// `‖x − x̂‖² / ‖x‖²`.
pub fn nmse(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(BenchError::LengthMismatch(x.len(), x_hat.len()));
    }
    let norm: f64 = x.iter().map(|v| v * v).sum();
    if norm == 0.0 {
        return Err(BenchError::ZeroReference);
    }
    let err: f64 = x.iter().zip(x_hat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(err / norm)
}

pub fn success(x: &[f64], x_hat: &[f64]) -> Result<bool> {
    Ok(nmse(x, x_hat)? <= SUCCESS_THRESHOLD)
}
