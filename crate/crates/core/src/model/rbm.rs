use num_complex::Complex64 as C64;

use super::activation::{log_cosh, log_cosh_and_tanh};
use super::params::{Layout, ParameterVector};
use super::{check_finite, check_sites, SpinConfiguration, Wavefunction};
use crate::error::Result;

/// Complex RBM: `ln ψ_x = Σ a_i z_i + Σ_μ ln cosh(b_μ + Σ_k W_μk z_k)`.
///
/// Layout: `a` (n), `b` (m), `W` (m × n, row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct Rbm {
    n: usize,
    m: usize,
    params: ParameterVector,
}

impl Rbm {
    pub fn layout(n: usize, m: usize) -> Layout {
        Layout::new(&[("a", 1, n), ("b", 1, m), ("W", m, n)])
    }

    pub fn from_parameters(n: usize, m: usize, params: ParameterVector) -> Result<Self> {
        let expected = Self::layout(n, m);
        let params = ParameterVector::new(expected, params.values().to_vec())?;
        Ok(Self { n, m, params })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self { n, m, params: ParameterVector::zeros(Self::layout(n, m)) }
    }

    pub fn hidden(&self) -> usize {
        self.m
    }

    fn theta(&self, x: SpinConfiguration, mu: usize) -> C64 {
        let b = self.params.view("b")[mu];
        let row = &self.params.view("W")[mu * self.n..(mu + 1) * self.n];
        row.iter().enumerate().fold(b, |acc, (k, w)| acc + w * x.spin(k))
    }
}

impl Wavefunction for Rbm {
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
        let a = self.params.view("a");
        let visible: C64 = a.iter().enumerate().map(|(i, ai)| ai * x.spin(i)).sum();
        let hidden: C64 = (0..self.m).map(|mu| log_cosh(self.theta(x, mu))).sum();
        check_finite(visible + hidden)
    }

    fn log_derivatives_into(&self, x: SpinConfiguration, out: &mut [C64]) -> Result<C64> {
        check_sites(self.n, x)?;
        let (n, m) = (self.n, self.m);
        let spins: Vec<f64> = x.spins().collect();
        let mut log_psi: C64 = self.params.view("a").iter().zip(&spins).map(|(a, z)| a * z).sum();
        for (o, z) in out[..n].iter_mut().zip(&spins) {
            *o = C64::new(*z, 0.0);
        }
        for mu in 0..m {
            let theta = self.theta(x, mu);
            let (lc, t) = log_cosh_and_tanh(theta);
            log_psi += lc;
            out[n + mu] = t;
            let row = &mut out[n + m + mu * n..n + m + (mu + 1) * n];
            for (o, z) in row.iter_mut().zip(&spins) {
                *o = t * z;
            }
        }
        check_finite(log_psi)
    }
}
