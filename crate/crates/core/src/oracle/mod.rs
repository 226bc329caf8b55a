//! Exact reference spectra: dense diagonalization of the Precipice
//! symmetric sector and sector Lanczos for J1-J2 lattices.

mod lanczos;

pub use lanczos::{lowest_eigenpairs, Eigenpairs, LanczosConfig, SectorMatrix};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::FixedWeightBasis;
use crate::error::{config_err, Error, Result};
use crate::hamiltonian::{sector_matrix_unchecked, Boundary, Hamiltonian, J1J2Hamiltonian};
use crate::model::SpinConfiguration;

/// Ground energy of the `n = 32`, `s = 0.8` Precipice instance, from a
/// 40-digit solve of the 33-dimensional symmetric sector.
pub const PRECIPICE_32_GROUND_ENERGY: f64 = 2.387_493_884_135_897;

/// Largest `n` accepted by [`precipice_spectrum`].
pub const MAX_PRECIPICE_SITES: usize = 10_000;
/// Largest fixed-weight sector handed to Lanczos.
pub const MAX_LANCZOS_DIM: usize = 5_000_000;
/// Largest full Hilbert space built densely.
pub const MAX_DENSE_DIM: usize = 4096;
/// Residual required of every reported eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sector {
    Symmetric,
    FixedWeight { weight: usize },
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub sector: Sector,
    pub dimension: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `‖H v - E v‖` for each eigenvalue.
    pub residuals: Vec<f64>,
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn dense_spectrum(m: DMatrix<f64>, sector: Sector, k: usize) -> Result<SpectrumResult> {
    let dimension = m.nrows();
    if (0..dimension).all(|c| (0..dimension).all(|r| r == c || m[(r, c)] == 0.0)) {
        let mut eigenvalues: Vec<f64> = m.diagonal().iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        eigenvalues.truncate(k.min(dimension));
        let residuals = vec![0.0; eigenvalues.len()];
        return Ok(SpectrumResult { sector, dimension, eigenvalues, residuals });
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dimension).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(k.min(dimension));
    let mut eigenvalues = Vec::with_capacity(order.len());
    let mut residuals = Vec::with_capacity(order.len());
    for i in order {
        let e = eig.eigenvalues[i];
        let v: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let r = (&m * &v - &v * e).norm();
        if !(r <= RESIDUAL_TOL * e.abs().max(1.0)) {
            return Err(Error::Convergence(format!("dense eigenpair residual {r:e}")));
        }
        eigenvalues.push(e);
        residuals.push(r);
    }
    Ok(SpectrumResult { sector, dimension, eigenvalues, residuals })
}

/// Lowest `k` levels of the Precipice Hamiltonian in the permutation-symmetric sector.
pub fn precipice_spectrum(n: usize, s: f64, k: usize) -> Result<SpectrumResult> {
    if n == 0 || n > MAX_PRECIPICE_SITES {
        return config_err(format!("precipice size {n} outside 1..={MAX_PRECIPICE_SITES}"));
    }
    if !(0.0..=1.0).contains(&s) {
        return config_err(format!("interpolation weight s={s} outside [0, 1]"));
    }
    dense_spectrum(sector_matrix_unchecked(n, s), Sector::Symmetric, k)
}

/// Dense matrix of `h` on the full `2^n` space, indexed by bitstring.
pub fn full_matrix(h: &Hamiltonian) -> Result<DMatrix<f64>> {
    let n = h.n_sites();
    if n >= 63 || 1usize << n > MAX_DENSE_DIM {
        return Err(Error::Capacity(format!("full space 2^{n} exceeds {MAX_DENSE_DIM}")));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let x = SpinConfiguration::new(c as u64, n)?;
        h.for_each_connected(x, |y, v| m[(y.bits() as usize, c)] += v);
    }
    Ok(m)
}

/// Lowest `k` levels of `h` on the full space by dense diagonalization.
pub fn full_spectrum(h: &Hamiltonian, k: usize) -> Result<SpectrumResult> {
    dense_spectrum(full_matrix(h)?, Sector::Full, k)
}

/// Lowest `k` levels of a weight-conserving `h` within one fixed-weight
/// sector, by Lanczos.
pub fn sector_spectrum(h: &Hamiltonian, weight: usize, k: usize, config: &LanczosConfig) -> Result<SectorSolution> {
    let basis = FixedWeightBasis::new(h.n_sites(), weight, MAX_LANCZOS_DIM)?;
    let matrix = SectorMatrix::build(h, &basis)?;
    let pairs = lowest_eigenpairs(&matrix, k, config)?;
    let spectrum = SpectrumResult {
        sector: Sector::FixedWeight { weight },
        dimension: basis.dim(),
        eigenvalues: pairs.values,
        residuals: pairs.residuals,
    };
    Ok(SectorSolution { spectrum, basis, vectors: pairs.vectors })
}

/// Sector spectrum together with its eigenvectors in colex order.
#[derive(Clone, Debug)]
pub struct SectorSolution {
    pub spectrum: SpectrumResult,
    pub basis: FixedWeightBasis,
    pub vectors: Vec<Vec<f64>>,
}

/// Lowest `k` levels of the J1-J2 model in the weight-`weight` sector.
pub fn j1j2_spectrum(
    lx: usize,
    ly: usize,
    j1: f64,
    j2: f64,
    boundary: Boundary,
    weight: usize,
    k: usize,
) -> Result<SpectrumResult> {
    let h = Hamiltonian::J1J2(J1J2Hamiltonian::new(lx, ly, j1, j2, boundary)?);
    Ok(sector_spectrum(&h, weight, k, &LanczosConfig::default())?.spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::PrecipiceHamiltonian;
    use crate::model::fixed_weight_states;

    fn precipice(n: usize, s: f64) -> Hamiltonian {
        Hamiltonian::Precipice(PrecipiceHamiltonian::new(n, s).unwrap())
    }

    fn j1j2(lx: usize, ly: usize, j2: f64, boundary: Boundary) -> Hamiltonian {
        Hamiltonian::J1J2(J1J2Hamiltonian::new(lx, ly, 1.0, j2, boundary).unwrap())
    }

    /// Dense spectrum of the full matrix restricted to one weight sector.
    fn dense_sector_levels(h: &Hamiltonian, weight: usize) -> Vec<f64> {
        let full = full_matrix(h).unwrap();
        let idx: Vec<usize> = fixed_weight_states(h.n_sites(), weight).map(|b| b as usize).collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])]);
        let mut e: Vec<f64> = sub.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn classical_limit_is_the_cost_table() {
        for n in [1, 5, 32, 200] {
            let r = precipice_spectrum(n, 1.0, n + 1).unwrap();
            let expected: Vec<f64> = std::iter::once(-1.0).chain((0..n).map(|w| w as f64)).collect();
            assert_eq!(r.eigenvalues, expected, "n={n}");
        }
    }

    #[test]
    fn symmetric_sector_matches_full_space() {
        for n in 2..=10 {
            let sector = precipice_spectrum(n, 0.8, 1).unwrap();
            let full = full_spectrum(&precipice(n, 0.8), 1).unwrap();
            assert!((sector.ground_energy() - full.ground_energy()).abs() < 1e-8, "n={n}");
            assert!(sector.residuals[0] <= RESIDUAL_TOL);
        }
    }

    #[test]
    fn symmetric_sector_levels_are_full_space_levels() {
        // every symmetric-sector level also appears in the full spectrum
        let n = 6;
        let sector = precipice_spectrum(n, 0.8, n + 1).unwrap();
        let full = full_spectrum(&precipice(n, 0.8), 1 << n).unwrap();
        for e in sector.eigenvalues {
            assert!(full.eigenvalues.iter().any(|f| (f - e).abs() < 1e-8), "{e}");
        }
    }

    #[test]
    fn frozen_precipice_threshold() {
        let r = precipice_spectrum(32, 0.8, 3).unwrap();
        assert!((r.ground_energy() - PRECIPICE_32_GROUND_ENERGY).abs() < 1e-12, "{}", r.ground_energy());
        assert!(r.eigenvalues[1] - r.eigenvalues[0] > 0.4);
    }

    #[test]
    fn all_ones_state_bounds_the_ground_energy() {
        for n in [4, 16, 32, 100] {
            let s = 0.8;
            let bound = s * -1.0 + (1.0 - s) * n as f64 / 2.0;
            assert!(precipice_spectrum(n, s, 1).unwrap().ground_energy() < bound);
        }
    }

    #[test]
    fn two_qubit_sector_by_hand() {
        let r = precipice_spectrum(2, 0.8, 3).unwrap();
        let full = full_spectrum(&precipice(2, 0.8), 4).unwrap();
        assert!((r.ground_energy() - full.ground_energy()).abs() < 1e-12);
    }

    #[test]
    fn plaquette_ground_energy() {
        // σ·σ on a 4-ring: the singlet ground state has energy -8
        let h = j1j2(2, 2, 0.0, Boundary::Open);
        let lz = sector_spectrum(&h, 2, 3, &LanczosConfig::default()).unwrap().spectrum;
        assert!((lz.ground_energy() + 8.0).abs() < 1e-10);
        let dense = dense_sector_levels(&h, 2);
        for (a, b) in lz.eigenvalues.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(lz.residuals.iter().all(|r| *r <= RESIDUAL_TOL));
    }

    #[test]
    fn zero_couplings_give_zero_spectrum() {
        let r = j1j2_spectrum(3, 2, 0.0, 0.0, Boundary::Open, 3, 2).unwrap();
        assert_eq!(r.dimension, 20);
        assert!(r.eigenvalues.iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn sector_lanczos_matches_dense_on_small_lattices() {
        let cases = [
            (2, 3, 0.5, Boundary::Open, 3),
            (3, 3, 0.695, Boundary::Open, 4),
            (4, 3, 0.3, Boundary::Open, 6),
            (4, 3, 0.62, Boundary::Periodic, 6),
            (3, 4, 1.0, Boundary::Periodic, 5),
        ];
        for (lx, ly, j2, boundary, weight) in cases {
            let h = j1j2(lx, ly, j2, boundary);
            let dense = dense_sector_levels(&h, weight);
            let k = 4.min(dense.len());
            let lz = sector_spectrum(&h, weight, k, &LanczosConfig::default()).unwrap().spectrum;
            for (a, b) in lz.eigenvalues.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-8, "{lx}x{ly} {boundary:?} w={weight}: {a} vs {b}");
            }
            assert!(lz.residuals.iter().all(|r| *r <= RESIDUAL_TOL));
            assert!(lz.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn small_restart_basis_still_converges() {
        let h = j1j2(4, 3, 0.5, Boundary::Open);
        let config = LanczosConfig { max_basis: 30, ..LanczosConfig::default() };
        let lz = sector_spectrum(&h, 6, 3, &config).unwrap().spectrum;
        let dense = dense_sector_levels(&h, 6);
        for (a, b) in lz.eigenvalues.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn csr_matrix_matches_dense_restriction() {
        let h = j1j2(3, 2, 0.4, Boundary::Periodic);
        let basis = FixedWeightBasis::new(6, 3, 100).unwrap();
        let m = SectorMatrix::build(&h, &basis).unwrap().to_dense();
        assert_eq!(m, m.transpose());
        let full = full_matrix(&h).unwrap();
        for r in 0..basis.dim() {
            for c in 0..basis.dim() {
                assert_eq!(m[(r, c)], full[(basis.unrank(r) as usize, basis.unrank(c) as usize)]);
            }
        }
    }

    #[test]
    fn invalid_requests_are_rejected() {
        assert!(precipice_spectrum(0, 0.8, 1).is_err());
        assert!(precipice_spectrum(4, 1.5, 1).is_err());
        assert!(matches!(sector_spectrum(&precipice(4, 0.8), 2, 1, &LanczosConfig::default()), Err(Error::Config(_))));
        assert!(matches!(full_matrix(&precipice(13, 0.8)), Err(Error::Capacity(_))));
    }
}
