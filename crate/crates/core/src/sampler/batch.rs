use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{config_err, Error, Result};
use crate::model::SpinConfiguration;
use crate::sr::{Covariance, EstimatedMoments};

/// Weighted configurations with cached `ln ψ`, `E_loc` and, optionally,
/// the log-derivative rows `O(x)`.
///
/// For the exact symmetric ensemble each entry stands for a whole Hamming
/// weight class and its weight is the class probability.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    configurations: Vec<SpinConfiguration>,
    weights: Vec<f64>,
    log_psi: Vec<C64>,
    local_energies: Vec<C64>,
    derivatives: Option<DMatrix<C64>>,
}

impl SampleBatch {
    /// Normalizes `weights` to sum to one. `derivatives`, if given, has one
    /// row per configuration.
    pub fn new(
        configurations: Vec<SpinConfiguration>,
        weights: Vec<f64>,
        log_psi: Vec<C64>,
        local_energies: Vec<C64>,
        derivatives: Option<DMatrix<C64>>,
    ) -> Result<Self> {
        let len = configurations.len();
        if len == 0 {
            return config_err("empty sample batch");
        }
        if weights.len() != len || log_psi.len() != len || local_energies.len() != len {
            return config_err("sample batch columns have different lengths");
        }
        if let Some(d) = &derivatives {
            if d.nrows() != len {
                return config_err("derivative rows do not match configurations");
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Numeric("sample weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Numeric("all sample weights vanish".into()));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { configurations, weights, log_psi, local_energies, derivatives })
    }

    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }

    pub fn configurations(&self) -> &[SpinConfiguration] {
        &self.configurations
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_psi(&self) -> &[C64] {
        &self.log_psi
    }

    pub fn local_energies(&self) -> &[C64] {
        &self.local_energies
    }

    pub fn derivatives(&self) -> Option<&DMatrix<C64>> {
        self.derivatives.as_ref()
    }

    /// `Re Σ w_x E_loc(x)`.
    pub fn energy(&self) -> f64 {
        self.weights.iter().zip(&self.local_energies).map(|(w, e)| w * e.re).sum()
    }

    /// Weighted standard deviation of `Re E_loc`.
    pub fn energy_std(&self) -> f64 {
        let mean = self.energy();
        let var: f64 = self.weights.iter().zip(&self.local_energies).map(|(w, e)| w * (e.re - mean).powi(2)).sum();
        var.max(0.0).sqrt()
    }

    /// Adds `shift` to every cached `ln ψ`; used to check gauge invariance.
    pub fn with_log_psi_shift(mut self, shift: C64) -> Self {
        for v in &mut self.log_psi {
            *v += shift;
        }
        self
    }
}

/// Force and covariance of the free-energy cost at temperature `T`:
/// `G(x) = E_loc(x) + T ln|ψ_x|²`, `f_k = ⟨O_k* G⟩ - ⟨O_k*⟩⟨G⟩`,
/// `s_kk' = ⟨O_k* O_k'⟩ - ⟨O_k*⟩⟨O_k'⟩`.
pub fn estimate_moments(batch: &SampleBatch, temperature: f64) -> Result<EstimatedMoments> {
    let Some(o) = batch.derivatives() else {
        return config_err("moments need a batch with log-derivatives");
    };
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return config_err(format!("temperature must be finite and >= 0, got {temperature}"));
    }
    let (rows, cols) = o.shape();
    let w = batch.weights();
    let g: Vec<C64> = batch
        .local_energies()
        .iter()
        .zip(batch.log_psi())
        .map(|(e, lp)| e + 2.0 * temperature * lp.re)
        .collect();
    let g_mean: C64 = w.iter().zip(&g).map(|(w, g)| g * *w).sum();

    let mut o_mean = DVector::from_element(cols, C64::new(0.0, 0.0));
    for (r, wr) in w.iter().enumerate() {
        for k in 0..cols {
            o_mean[k] += o[(r, k)] * *wr;
        }
    }
    let mut centered = DMatrix::from_element(rows, cols, C64::new(0.0, 0.0));
    let mut force = DVector::from_element(cols, C64::new(0.0, 0.0));
    for (r, wr) in w.iter().enumerate() {
        let sw = wr.sqrt();
        let dg = (g[r] - g_mean) * *wr;
        for k in 0..cols {
            let d = o[(r, k)] - o_mean[k];
            centered[(r, k)] = d * sw;
            force[k] += d.conj() * dg;
        }
    }
    if force.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite force".into()));
    }
    Ok(EstimatedMoments {
        energy: batch.energy(),
        energy_std: batch.energy_std(),
        cost: g_mean.re,
        temperature,
        force,
        covariance: Covariance::from_centered_rows(centered),
        n_samples: rows,
    })
}
