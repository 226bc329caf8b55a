use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::batch::SampleBatch;
use crate::basis::FixedWeightBasis;
use crate::error::{config_err, Error, Result};
use crate::hamiltonian::{local_energy_with, Hamiltonian};
use crate::model::{SpinConfiguration, Wavefunction};

/// Largest fixed-weight sector that is enumerated exactly.
pub const MAX_SECTOR_DIM: usize = 2_000_000;
/// Cap on `states × parameters` for exact batches that keep derivatives.
pub const MAX_DERIVATIVE_ENTRIES: usize = 50_000_000;

fn check_sizes<W: Wavefunction + ?Sized>(ansatz: &W, h: &Hamiltonian) -> Result<usize> {
    let n = ansatz.n_sites();
    if h.n_sites() != n {
        return config_err(format!("ansatz has {n} sites, Hamiltonian {}", h.n_sites()));
    }
    Ok(n)
}

/// Probabilities `∝ exp(log_weight)` computed relative to the maximum.
fn relative_probabilities(log_weights: &[f64]) -> Result<(Vec<f64>, f64)> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numeric("all amplitudes vanish or are non-finite".into()));
    }
    Ok((log_weights.iter().map(|l| (l - max).exp()).collect(), max))
}

/// Exact ensemble over Hamming-weight classes for a permutation-invariant
/// ansatz: class `w` has probability `∝ C(n, w) |ψ_w|²`.
///
/// Only valid for a permutation-invariant Hamiltonian; classes whose
/// probability underflows to zero are dropped.
pub fn exact_symmetric_ensemble<W: Wavefunction + ?Sized>(
    ansatz: &W,
    h: &Hamiltonian,
    derivatives: bool,
) -> Result<SampleBatch> {
    let n = check_sizes(ansatz, h)?;
    let Hamiltonian::Precipice(p) = h else {
        return config_err("the symmetric ensemble needs a permutation-invariant Hamiltonian");
    };
    let reps: Vec<SpinConfiguration> =
        (0..=n).map(|w| SpinConfiguration::with_weight(n, w)).collect::<Result<_>>()?;
    let n_params = ansatz.n_params();
    let mut o_rows = if derivatives { Some(DMatrix::zeros(n + 1, n_params)) } else { None };
    let mut row = vec![C64::new(0.0, 0.0); n_params];
    let mut log_psi = Vec::with_capacity(n + 1);
    for (w, x) in reps.iter().enumerate() {
        if let Some(o) = o_rows.as_mut() {
            log_psi.push(ansatz.log_derivatives_into(*x, &mut row)?);
            for (k, v) in row.iter().enumerate() {
                o[(w, k)] = *v;
            }
        } else {
            log_psi.push(ansatz.log_amplitude(*x)?);
        }
    }
    let mut ln_count = 0.0;
    let log_weights: Vec<f64> = (0..=n)
        .map(|w| {
            if w > 0 {
                ln_count += ((n - w + 1) as f64 / w as f64).ln();
            }
            ln_count + 2.0 * log_psi[w].re
        })
        .collect();
    let (probs, _) = relative_probabilities(&log_weights)?;

    // flipping one of the w ones lowers the weight, flipping a zero raises it
    let off = p.flip_element();
    let mut keep = Vec::new();
    let mut energies = Vec::new();
    for w in 0..=n {
        if probs[w] == 0.0 {
            continue;
        }
        let mut e = C64::new(p.diagonal_for_weight(w), 0.0);
        if off != 0.0 {
            if w > 0 {
                e += off * w as f64 * (log_psi[w - 1] - log_psi[w]).exp();
            }
            if w < n {
                e += off * (n - w) as f64 * (log_psi[w + 1] - log_psi[w]).exp();
            }
        }
        if !e.is_finite() {
            return Err(Error::Numeric(format!("non-finite local energy in weight class {w}")));
        }
        keep.push(w);
        energies.push(e);
    }
    let o_rows = o_rows.map(|o| o.select_rows(&keep));
    SampleBatch::new(
        keep.iter().map(|&w| reps[w]).collect(),
        keep.iter().map(|&w| probs[w]).collect(),
        keep.iter().map(|&w| log_psi[w]).collect(),
        energies,
        o_rows,
    )
}

/// Exact ensemble over every configuration of Hamming weight `weight`, with
/// probabilities `|ψ_x|² / Σ|ψ|²`. Needs a weight-conserving Hamiltonian.
pub fn exact_sector_ensemble<W: Wavefunction + Sync + ?Sized>(
    ansatz: &W,
    h: &Hamiltonian,
    weight: usize,
    derivatives: bool,
) -> Result<SampleBatch> {
    let n = check_sizes(ansatz, h)?;
    if !h.conserves_weight() {
        return config_err("the sector ensemble needs a weight-conserving Hamiltonian");
    }
    let basis = FixedWeightBasis::new(n, weight, MAX_SECTOR_DIM)?;
    let dim = basis.dim();
    let n_params = ansatz.n_params();
    if derivatives && dim.saturating_mul(n_params) > MAX_DERIVATIVE_ENTRIES {
        return Err(Error::Capacity(format!(
            "{dim} states × {n_params} parameters exceeds the derivative budget"
        )));
    }
    let states: Vec<SpinConfiguration> =
        basis.states().map(|b| SpinConfiguration::new(b, n)).collect::<Result<_>>()?;
    let log_psi: Vec<C64> = states.par_iter().map(|x| ansatz.log_amplitude(*x)).collect::<Result<_>>()?;
    let log_weights: Vec<f64> = log_psi.iter().map(|l| 2.0 * l.re).collect();
    let (probs, max) = relative_probabilities(&log_weights)?;
    let shift = C64::new(max / 2.0, 0.0);

    let keep: Vec<usize> = (0..dim).filter(|&r| probs[r] > 0.0).collect();
    let energies: Vec<C64> = keep
        .par_iter()
        .map(|&r| {
            let lookup = |y: SpinConfiguration| Ok(log_psi[basis.rank(y.bits())] - shift);
            local_energy_with(h, states[r], log_psi[r] - shift, lookup)
        })
        .collect::<Result<_>>()?;
    let o_rows = if derivatives {
        let mut o = DMatrix::zeros(keep.len(), n_params);
        let mut row = vec![C64::new(0.0, 0.0); n_params];
        for (i, &r) in keep.iter().enumerate() {
            ansatz.log_derivatives_into(states[r], &mut row)?;
            for (k, v) in row.iter().enumerate() {
                o[(i, k)] = *v;
            }
        }
        Some(o)
    } else {
        None
    };
    SampleBatch::new(
        keep.iter().map(|&r| states[r]).collect(),
        keep.iter().map(|&r| probs[r]).collect(),
        keep.iter().map(|&r| log_psi[r]).collect(),
        energies,
        o_rows,
    )
}
