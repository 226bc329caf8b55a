//! Complex-parameter wavefunction ansatzes.
//!
//! Every ansatz maps a [`SpinConfiguration`] to a complex log-amplitude
//! `ln ψ_x(α)` and to the log-derivatives `O_k(x) = ∂_{α_k} ln ψ_x`, listed
//! in the order of the ansatz's [`Layout`].

pub mod activation;
pub mod checkpoint;
mod configuration;
mod feedforward;
mod params;
mod rbm;
mod symmetric_rbm;

pub use configuration::{fixed_weight_states, SpinConfiguration, MAX_SITES};
pub use feedforward::FeedForward;
pub use params::{Layout, ParameterVector, Segment};
pub use rbm::Rbm;
pub use symmetric_rbm::SymmetricRbm;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

/// Default standard deviation of the random initialization.
pub const DEFAULT_INIT_SCALE: f64 = 0.01;

pub trait Wavefunction {
    fn n_sites(&self) -> usize;

    fn parameters(&self) -> &ParameterVector;

    fn parameters_mut(&mut self) -> &mut ParameterVector;

    fn n_params(&self) -> usize {
        self.parameters().len()
    }

    fn log_amplitude(&self, x: SpinConfiguration) -> Result<C64>;

    /// Writes `O_k(x)` into `out` (length `n_params`) and returns `ln ψ_x`.
    fn log_derivatives_into(&self, x: SpinConfiguration, out: &mut [C64]) -> Result<C64>;

    fn log_derivatives(&self, x: SpinConfiguration) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.n_params()];
        self.log_derivatives_into(x, &mut out)?;
        Ok(out)
    }
}

pub(crate) fn check_sites(n: usize, x: SpinConfiguration) -> Result<()> {
    if x.n() != n {
        return config_err(format!("configuration has {} sites, ansatz expects {n}", x.n()));
    }
    Ok(())
}

pub(crate) fn check_finite(v: C64) -> Result<C64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("non-finite log-amplitude {v}")))
    }
}

/// Architecture and size of an ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnsatzShape {
    Rbm { n: usize, hidden: usize },
    SymmetricRbm { n: usize, hidden: usize },
    FeedForward { n: usize, hidden: [usize; 3] },
}

impl AnsatzShape {
    pub fn n_sites(&self) -> usize {
        match *self {
            Self::Rbm { n, .. } | Self::SymmetricRbm { n, .. } | Self::FeedForward { n, .. } => n,
        }
    }

    pub fn layout(&self) -> Layout {
        match *self {
            Self::Rbm { n, hidden } => Rbm::layout(n, hidden),
            Self::SymmetricRbm { hidden, .. } => SymmetricRbm::layout(hidden),
            Self::FeedForward { n, hidden } => FeedForward::layout(n, hidden),
        }
    }

    pub fn n_params(&self) -> usize {
        self.layout().len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        if n == 0 || n > MAX_SITES {
            return config_err(format!("site count {n} outside 1..={MAX_SITES}"));
        }
        let ok = match *self {
            Self::Rbm { hidden, .. } | Self::SymmetricRbm { hidden, .. } => hidden > 0,
            Self::FeedForward { hidden, .. } => hidden.iter().all(|&h| h > 0),
        };
        if !ok {
            return config_err("hidden layer sizes must be positive");
        }
        Ok(())
    }
}

/// Random parameters with real and imaginary parts drawn independently from
/// `N(0, scale²)`; deterministic for a given seed.
pub fn init_parameters(shape: &AnsatzShape, seed: u64, scale: f64) -> Result<ParameterVector> {
    shape.validate()?;
    if !(scale >= 0.0) || !scale.is_finite() {
        return config_err(format!("initialization scale must be finite and >= 0, got {scale}"));
    }
    let layout = shape.layout();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..layout.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(scale * re, scale * im)
        })
        .collect();
    ParameterVector::new(layout, values)
}

/// Any of the supported ansatzes.
#[derive(Clone, Debug, PartialEq)]
pub enum Ansatz {
    Rbm(Rbm),
    SymmetricRbm(SymmetricRbm),
    FeedForward(FeedForward),
}

impl Ansatz {
    pub fn from_parameters(shape: &AnsatzShape, params: ParameterVector) -> Result<Self> {
        shape.validate()?;
        Ok(match *shape {
            AnsatzShape::Rbm { n, hidden } => Self::Rbm(Rbm::from_parameters(n, hidden, params)?),
            AnsatzShape::SymmetricRbm { n, hidden } => {
                Self::SymmetricRbm(SymmetricRbm::from_parameters(n, hidden, params)?)
            }
            AnsatzShape::FeedForward { n, hidden } => {
                Self::FeedForward(FeedForward::from_parameters(n, hidden, params)?)
            }
        })
    }

    pub fn random(shape: &AnsatzShape, seed: u64, scale: f64) -> Result<Self> {
        Self::from_parameters(shape, init_parameters(shape, seed, scale)?)
    }

    pub fn shape(&self) -> AnsatzShape {
        match self {
            Self::Rbm(r) => AnsatzShape::Rbm { n: r.n_sites(), hidden: r.hidden() },
            Self::SymmetricRbm(r) => AnsatzShape::SymmetricRbm { n: r.n_sites(), hidden: r.hidden() },
            Self::FeedForward(f) => AnsatzShape::FeedForward { n: f.n_sites(), hidden: f.hidden() },
        }
    }

    fn inner(&self) -> &dyn Wavefunction {
        match self {
            Self::Rbm(r) => r,
            Self::SymmetricRbm(r) => r,
            Self::FeedForward(f) => f,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Wavefunction {
        match self {
            Self::Rbm(r) => r,
            Self::SymmetricRbm(r) => r,
            Self::FeedForward(f) => f,
        }
    }
}

impl Wavefunction for Ansatz {
    fn n_sites(&self) -> usize {
        self.inner().n_sites()
    }

    fn parameters(&self) -> &ParameterVector {
        self.inner().parameters()
    }

    fn parameters_mut(&mut self) -> &mut ParameterVector {
        self.inner_mut().parameters_mut()
    }

    fn log_amplitude(&self, x: SpinConfiguration) -> Result<C64> {
        self.inner().log_amplitude(x)
    }

    fn log_derivatives_into(&self, x: SpinConfiguration, out: &mut [C64]) -> Result<C64> {
        if out.len() != self.n_params() {
            return config_err(format!(
                "derivative buffer has length {}, expected {}",
                out.len(),
                self.n_params()
            ));
        }
        self.inner().log_derivatives_into(x, out)
    }
}
