use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Parameter counts above this use the factored (matrix-free) covariance.
pub const DENSE_COVARIANCE_LIMIT: usize = 2000;

/// Quantum geometric covariance `s_kk' = ⟨O_k* O_k'⟩ - ⟨O_k*⟩⟨O_k'⟩`.
///
/// `Factored` keeps the weighted, centered derivative rows `R` with
/// `s = R† R` and applies `s` without forming it.
#[derive(Clone, Debug, PartialEq)]
pub enum Covariance {
    Dense(DMatrix<C64>),
    Factored(DMatrix<C64>),
}

impl Covariance {
    /// From centered rows `sqrt(w_x) (O(x) - ⟨O⟩)`, one per sample.
    pub fn from_centered_rows(rows: DMatrix<C64>) -> Self {
        if rows.ncols() <= DENSE_COVARIANCE_LIMIT {
            Self::Dense(gram(&rows))
        } else {
            Self::Factored(rows)
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(s) => s.nrows(),
            Self::Factored(r) => r.ncols(),
        }
    }

    pub fn diagonal(&self) -> DVector<f64> {
        match self {
            Self::Dense(s) => DVector::from_iterator(s.nrows(), (0..s.nrows()).map(|k| s[(k, k)].re)),
            Self::Factored(r) => {
                DVector::from_iterator(r.ncols(), r.column_iter().map(|c| c.norm_squared()))
            }
        }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        match self {
            Self::Dense(s) => s * v,
            Self::Factored(r) => r.adjoint() * (r * v),
        }
    }

    /// `v† s v`, real for Hermitian `s`.
    pub fn quadratic_form(&self, v: &DVector<C64>) -> f64 {
        match self {
            Self::Dense(s) => v.dotc(&(s * v)).re,
            Self::Factored(r) => (r * v).norm_squared(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match self {
            Self::Dense(s) => s.clone(),
            Self::Factored(r) => r.adjoint() * r,
        }
    }
}

/// `R† R`, filling the upper triangle and mirroring it.
fn gram(rows: &DMatrix<C64>) -> DMatrix<C64> {
    let (n, p) = rows.shape();
    let data = rows.as_slice();
    let column = |k: usize| &data[k * n..(k + 1) * n];
    let mut s = DMatrix::from_element(p, p, C64::new(0.0, 0.0));
    for j in 0..p {
        let cj = column(j);
        for i in 0..=j {
            let v: C64 = column(i).iter().zip(cj).map(|(a, b)| a.conj() * b).sum();
            s[(i, j)] = v;
            s[(j, i)] = v.conj();
        }
    }
    s
}

/// Ensemble estimates feeding one SR step.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatedMoments {
    /// `Re ⟨E_loc⟩`.
    pub energy: f64,
    /// Standard deviation of `Re E_loc` over the ensemble.
    pub energy_std: f64,
    /// `Re ⟨E_loc + T ln|ψ|²⟩`.
    pub cost: f64,
    pub temperature: f64,
    pub force: DVector<C64>,
    pub covariance: Covariance,
    pub n_samples: usize,
}
