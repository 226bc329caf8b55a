use num_complex::Complex64 as C64;

use super::activation::{log_cosh, log_cosh_and_tanh};
use super::params::{Layout, ParameterVector};
use super::{check_finite, check_sites, SpinConfiguration, Wavefunction};
use crate::error::Result;

/// Permutation-invariant RBM: `ln ψ_x = a M + Σ_μ ln cosh(b_μ + W_μ M)` with
/// `M = Σ_i z_i`. Amplitudes depend on `x` only through its Hamming weight.
///
/// Layout: `a` (1), `b` (m), `W` (m).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricRbm {
    n: usize,
    m: usize,
    params: ParameterVector,
}

impl SymmetricRbm {
    pub fn layout(m: usize) -> Layout {
        Layout::new(&[("a", 1, 1), ("b", 1, m), ("W", 1, m)])
    }

    pub fn from_parameters(n: usize, m: usize, params: ParameterVector) -> Result<Self> {
        let params = ParameterVector::new(Self::layout(m), params.values().to_vec())?;
        Ok(Self { n, m, params })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self { n, m, params: ParameterVector::zeros(Self::layout(m)) }
    }

    pub fn hidden(&self) -> usize {
        self.m
    }

    /// `ln ψ` for any configuration of Hamming weight `weight`.
    pub fn log_amplitude_for_weight(&self, weight: usize) -> Result<C64> {
        let mag = (self.n as f64) - 2.0 * weight as f64;
        let a = self.params.view("a")[0];
        let b = self.params.view("b");
        let w = self.params.view("W");
        let hidden: C64 = b.iter().zip(w).map(|(b, w)| log_cosh(b + w * mag)).sum();
        check_finite(a * mag + hidden)
    }
}

impl Wavefunction for SymmetricRbm {
    fn n_sites(&self) -> usize {
        self.n
    }

    fn parameters(&self) -> &ParameterVector {
        &self.params
    }

    fn parameters_mut(&mut self) -> &mut ParameterVector {
        &mut self.params
    }

    fn log_amplitude(&self, x: SpinConfiguration) -> Result<C64> {
        check_sites(self.n, x)?;
        self.log_amplitude_for_weight(x.weight())
    }

    fn log_derivatives_into(&self, x: SpinConfiguration, out: &mut [C64]) -> Result<C64> {
        check_sites(self.n, x)?;
        let mag = x.magnetization() as f64;
        let m = self.m;
        let mut log_psi = self.params.view("a")[0] * mag;
        out[0] = C64::new(mag, 0.0);
        let b = self.params.view("b");
        let w = self.params.view("W");
        for mu in 0..m {
            let theta = b[mu] + w[mu] * mag;
            let (lc, t) = log_cosh_and_tanh(theta);
            log_psi += lc;
            out[1 + mu] = t;
            out[1 + m + mu] = t * mag;
        }
        check_finite(log_psi)
    }
}
