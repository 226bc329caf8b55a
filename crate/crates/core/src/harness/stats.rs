use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Two-sided coverage of ±2σ for a normal variable.
pub const TWO_SIGMA_LEVEL: f64 = 0.9545;
pub const DEFAULT_RESAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub n: usize,
    pub successes: usize,
    pub frequency: f64,
    /// Percentile bootstrap interval.
    pub lower: f64,
    pub upper: f64,
    /// `2 sqrt(p (1 - p) / n)`.
    pub two_sem: f64,
}

/// Success frequency with a percentile bootstrap interval at `level`.
pub fn bootstrap_ci(flags: &[bool], resamples: usize, level: f64, seed: u64) -> Result<FrequencyEstimate> {
    if flags.is_empty() {
        return config_err("bootstrap needs at least one flag");
    }
    if resamples == 0 || !(level > 0.0 && level < 1.0) {
        return config_err(format!("invalid bootstrap settings: {resamples} resamples at level {level}"));
    }
    let n = flags.len();
    let successes = flags.iter().filter(|f| **f).count();
    let frequency = successes as f64 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).filter(|_| flags[rng.random_range(0..n)]).count() as f64 / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(FrequencyEstimate {
        n,
        successes,
        frequency,
        lower: quantile(&means, tail),
        upper: quantile(&means, 1.0 - tail),
        two_sem: 2.0 * (frequency * (1.0 - frequency) / n as f64).sqrt(),
    })
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
