use nalgebra::DMatrix;

use crate::error::{config_err, Result};
use crate::model::{SpinConfiguration, MAX_SITES};

/// Classical cost of the Precipice problem: `-1` at the all-ones string,
/// the Hamming weight otherwise.
pub fn precipice_cost(weight: usize, n: usize) -> f64 {
    if weight == n {
        -1.0
    } else {
        weight as f64
    }
}

/// `H = (1-s)/2 Σ_i (1 - σ^x_i) + s Σ_x f(x) |x⟩⟨x|`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecipiceHamiltonian {
    n: usize,
    s: f64,
}

impl PrecipiceHamiltonian {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return config_err(format!("precipice size {n} outside 1..={MAX_SITES}"));
        }
        if !(0.0..=1.0).contains(&s) {
            return config_err(format!("interpolation weight s={s} outside [0, 1]"));
        }
        Ok(Self { n, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn diagonal_for_weight(&self, weight: usize) -> f64 {
        (1.0 - self.s) * self.n as f64 / 2.0 + self.s * precipice_cost(weight, self.n)
    }

    pub fn diagonal(&self, x: SpinConfiguration) -> f64 {
        self.diagonal_for_weight(x.weight())
    }

    /// Element between configurations at Hamming distance one.
    pub fn flip_element(&self) -> f64 {
        -(1.0 - self.s) / 2.0
    }

    pub fn for_each_connected<F: FnMut(SpinConfiguration, f64)>(&self, x: SpinConfiguration, mut f: F) {
        f(x, self.diagonal(x));
        let off = self.flip_element();
        if off != 0.0 {
            for i in 0..self.n {
                f(x.flipped(i), off);
            }
        }
    }
}

/// The Hamiltonian restricted to the permutation-symmetric sector, in the
/// basis of normalized uniform superpositions `|w⟩` of weight-`w` strings.
pub fn symmetric_sector_matrix(h: &PrecipiceHamiltonian) -> DMatrix<f64> {
    sector_matrix_unchecked(h.n(), h.s())
}

/// Same as [`symmetric_sector_matrix`] without the site-count limit of the
/// bitstring representation.
pub(crate) fn sector_matrix_unchecked(n: usize, s: f64) -> DMatrix<f64> {
    let off = -(1.0 - s) / 2.0;
    let diag = |w: usize| (1.0 - s) * n as f64 / 2.0 + s * precipice_cost(w, n);
    DMatrix::from_fn(n + 1, n + 1, |r, c| {
        if r == c {
            diag(r)
        } else if r == c + 1 {
            off * (((n - c) * (c + 1)) as f64).sqrt()
        } else if c == r + 1 {
            off * (((n - r) * (r + 1)) as f64).sqrt()
        } else {
            0.0
        }
    })
}
