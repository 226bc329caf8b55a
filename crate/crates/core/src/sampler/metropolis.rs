use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::batch::SampleBatch;
use crate::error::{config_err, Result};
use crate::hamiltonian::{local_energy_with, Hamiltonian};
use crate::model::{SpinConfiguration, Wavefunction, MAX_SITES};

/// Fixed-weight Metropolis chain with exchange moves: one occupied and one
/// empty site are picked uniformly and swapped, accepted with
/// `min(1, |ψ(x')/ψ(x)|²)`.
///
/// Burn-in of `10 n` proposals happens on the first draw only; retained
/// samples are `n` proposals apart.
#[derive(Clone, Debug, PartialEq)]
pub struct MetropolisChain {
    state: SpinConfiguration,
    rng: ChaCha8Rng,
    burned_in: bool,
    proposed: u64,
    accepted: u64,
}

impl MetropolisChain {
    /// Chain started from a uniformly random configuration of weight `weight`.
    pub fn new(n: usize, weight: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_SITES || weight > n {
            return config_err(format!("invalid chain sector n={n}, weight={weight}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sites: Vec<usize> = (0..n).collect();
        let mut bits = 0u64;
        for k in 0..weight {
            let j = rng.random_range(k..n);
            sites.swap(k, j);
            bits |= 1 << sites[k];
        }
        Ok(Self::from_state(SpinConfiguration::new(bits, n)?, rng))
    }

    pub fn from_state(state: SpinConfiguration, rng: ChaCha8Rng) -> Self {
        Self { state, rng, burned_in: false, proposed: 0, accepted: 0 }
    }

    pub fn state(&self) -> SpinConfiguration {
        self.state
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn propose(&mut self) -> SpinConfiguration {
        let n = self.state.n();
        let w = self.state.weight();
        if w == 0 || w == n {
            return self.state;
        }
        let bits = self.state.bits();
        let occupied = nth_set_bit(bits, self.rng.random_range(0..w));
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let empty = nth_set_bit(!bits & mask, self.rng.random_range(0..n - w));
        self.state.exchanged(occupied, empty)
    }

    fn advance<W: Wavefunction + ?Sized>(&mut self, psi: &W, log_psi: &mut C64, proposals: usize) -> Result<()> {
        for _ in 0..proposals {
            let candidate = self.propose();
            self.proposed += 1;
            if candidate == self.state {
                self.accepted += 1;
                continue;
            }
            let lp = psi.log_amplitude(candidate)?;
            let ratio = (2.0 * (lp.re - log_psi.re)).exp();
            if ratio >= 1.0 || self.rng.random::<f64>() < ratio {
                self.state = candidate;
                *log_psi = lp;
                self.accepted += 1;
            }
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn advance_for_test<W: Wavefunction + ?Sized>(&mut self, psi: &W, log_psi: &mut C64) {
        self.advance(psi, log_psi, 1).unwrap();
    }

    /// Draws `count` configurations from `|ψ|²`.
    pub fn sample<W: Wavefunction + ?Sized>(&mut self, psi: &W, count: usize) -> Result<Vec<SpinConfiguration>> {
        let n = self.state.n();
        if psi.n_sites() != n {
            return config_err(format!("chain has {n} sites, ansatz {}", psi.n_sites()));
        }
        let mut log_psi = psi.log_amplitude(self.state)?;
        if !self.burned_in {
            self.advance(psi, &mut log_psi, 10 * n)?;
            self.burned_in = true;
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            self.advance(psi, &mut log_psi, n)?;
            out.push(self.state);
        }
        Ok(out)
    }
}

fn nth_set_bit(mut bits: u64, k: usize) -> usize {
    for _ in 0..k {
        bits &= bits - 1;
    }
    bits.trailing_zeros() as usize
}

/// Equal-weight batch of `count` chain samples with local energies and,
/// if requested, log-derivatives.
pub fn metropolis_exchange<W: Wavefunction + ?Sized>(
    psi: &W,
    h: &Hamiltonian,
    count: usize,
    chain: &mut MetropolisChain,
    derivatives: bool,
) -> Result<SampleBatch> {
    if count == 0 {
        return config_err("sample count must be positive");
    }
    let configurations = chain.sample(psi, count)?;
    let n_params = psi.n_params();
    let mut o = derivatives.then(|| DMatrix::zeros(count, n_params));
    let mut row = vec![C64::new(0.0, 0.0); n_params];
    let mut log_psi = Vec::with_capacity(count);
    let mut energies = Vec::with_capacity(count);
    for (i, x) in configurations.iter().enumerate() {
        let lp = match o.as_mut() {
            Some(o) => {
                let lp = psi.log_derivatives_into(*x, &mut row)?;
                for (k, v) in row.iter().enumerate() {
                    o[(i, k)] = *v;
                }
                lp
            }
            None => psi.log_amplitude(*x)?,
        };
        energies.push(local_energy_with(h, *x, lp, |y| psi.log_amplitude(y))?);
        log_psi.push(lp);
    }
    SampleBatch::new(configurations, vec![1.0; count], log_psi, energies, o)
}
