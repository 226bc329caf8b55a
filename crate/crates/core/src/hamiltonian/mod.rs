//! Hamiltonians with sparse row access and local energies.

mod j1j2;
mod precipice;

pub use j1j2::{Boundary, J1J2Hamiltonian};
pub(crate) use precipice::sector_matrix_unchecked;
pub use precipice::{precipice_cost, symmetric_sector_matrix, PrecipiceHamiltonian};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::model::{SpinConfiguration, Wavefunction};

/// Below this `Re ln ψ_x` the amplitude is treated as underflowed.
pub const LOG_AMPLITUDE_FLOOR: f64 = -700.0;

/// Hamiltonian selection as written in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianSpec {
    Precipice {
        n: usize,
        #[serde(default = "default_s")]
        s: f64,
    },
    J1j2 {
        lx: usize,
        ly: usize,
        #[serde(default = "default_j1")]
        j1: f64,
        j2: f64,
        #[serde(default)]
        boundary: Boundary,
    },
}

fn default_s() -> f64 {
    0.8
}

fn default_j1() -> f64 {
    1.0
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<Hamiltonian> {
        Ok(match *self {
            Self::Precipice { n, s } => Hamiltonian::Precipice(PrecipiceHamiltonian::new(n, s)?),
            Self::J1j2 { lx, ly, j1, j2, boundary } => {
                Hamiltonian::J1J2(J1J2Hamiltonian::new(lx, ly, j1, j2, boundary)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Hamiltonian {
    Precipice(PrecipiceHamiltonian),
    J1J2(J1J2Hamiltonian),
}

impl Hamiltonian {
    pub fn n_sites(&self) -> usize {
        match self {
            Self::Precipice(h) => h.n(),
            Self::J1J2(h) => h.n_sites(),
        }
    }

    /// True if every off-diagonal element connects states of equal weight.
    pub fn conserves_weight(&self) -> bool {
        matches!(self, Self::J1J2(_))
    }

    pub fn diagonal(&self, x: SpinConfiguration) -> f64 {
        match self {
            Self::Precipice(h) => h.diagonal(x),
            Self::J1J2(h) => h.diagonal(x),
        }
    }

    /// Calls `f(x', H_{x'x})` for the diagonal entry and every nonzero
    /// off-diagonal entry of column `x`.
    pub fn for_each_connected<F: FnMut(SpinConfiguration, f64)>(&self, x: SpinConfiguration, f: F) {
        match self {
            Self::Precipice(h) => h.for_each_connected(x, f),
            Self::J1J2(h) => h.for_each_connected(x, f),
        }
    }

    /// Sparse column of `H` at `x`, diagonal entry first.
    pub fn connected(&self, x: SpinConfiguration) -> Vec<(SpinConfiguration, f64)> {
        let mut out = Vec::new();
        self.for_each_connected(x, |y, h| out.push((y, h)));
        out
    }

    pub(crate) fn check(&self, x: SpinConfiguration) -> Result<()> {
        if x.n() != self.n_sites() {
            return config_err(format!(
                "configuration has {} sites, Hamiltonian acts on {}",
                x.n(),
                self.n_sites()
            ));
        }
        Ok(())
    }
}

/// `E_loc(x) = Σ_{x'} H_{x x'} ψ_{x'}/ψ_x`, with amplitudes supplied as
/// log-amplitudes by `log_amp`.
pub fn local_energy_with<F>(h: &Hamiltonian, x: SpinConfiguration, log_psi_x: C64, mut log_amp: F) -> Result<C64>
where
    F: FnMut(SpinConfiguration) -> Result<C64>,
{
    h.check(x)?;
    if !(log_psi_x.re > LOG_AMPLITUDE_FLOOR) {
        return Err(Error::Numeric(format!("amplitude underflow at {x:?}: ln ψ = {log_psi_x}")));
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut failure = None;
    h.for_each_connected(x, |y, elem| {
        if failure.is_some() {
            return;
        }
        if y == x {
            acc += elem;
        } else {
            match log_amp(y) {
                Ok(lp) => acc += elem * (lp - log_psi_x).exp(),
                Err(e) => failure = Some(e),
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if !acc.is_finite() {
        return Err(Error::Numeric(format!("non-finite local energy at {x:?}")));
    }
    Ok(acc)
}

pub fn local_energy<W: Wavefunction + ?Sized>(h: &Hamiltonian, ansatz: &W, x: SpinConfiguration) -> Result<C64> {
    let lp = ansatz.log_amplitude(x)?;
    local_energy_with(h, x, lp, |y| ansatz.log_amplitude(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ansatz, Rbm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_site_heisenberg() -> Hamiltonian {
        Hamiltonian::J1J2(J1J2Hamiltonian::new(2, 1, 1.0, 0.0, Boundary::Open).unwrap())
    }

    #[test]
    fn uniform_local_energy_two_site_heisenberg() {
        let h = two_site_heisenberg();
        let psi = Ansatz::Rbm(Rbm::zeros(2, 1));
        let x = SpinConfiguration::from_bit_slice(&[0, 1]).unwrap();
        let e = local_energy(&h, &psi, x).unwrap();
        assert!((e - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn uniform_local_energy_precipice() {
        let h = Hamiltonian::Precipice(PrecipiceHamiltonian::new(2, 0.8).unwrap());
        let psi = Ansatz::Rbm(Rbm::zeros(2, 1));
        let x = SpinConfiguration::from_bit_slice(&[1, 1]).unwrap();
        let e = local_energy(&h, &psi, x).unwrap();
        assert!((e - C64::new(-0.8, 0.0)).norm() < 1e-14, "{e}");
    }

    #[test]
    fn ground_eigenvector_gives_constant_local_energy() {
        // Singlet (|01⟩ - |10⟩)/√2 of σ·σ has energy -3.
        let h = two_site_heisenberg();
        let log_amp = |y: SpinConfiguration| -> Result<C64> {
            match y.bits() {
                0b01 => Ok(C64::new(0.0, 0.0)),
                0b10 => Ok(C64::new(0.0, std::f64::consts::PI)),
                _ => Ok(C64::new(-1000.0, 0.0)),
            }
        };
        for bits in [0b01u64, 0b10] {
            let x = SpinConfiguration::new(bits, 2).unwrap();
            let e = local_energy_with(&h, x, log_amp(x).unwrap(), log_amp).unwrap();
            assert!((e - C64::new(-3.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn underflowed_amplitude_is_flagged() {
        let h = two_site_heisenberg();
        let x = SpinConfiguration::new(0b01, 2).unwrap();
        let r = local_energy_with(&h, x, C64::new(-800.0, 0.0), |_| Ok(C64::new(0.0, 0.0)));
        assert!(matches!(r, Err(Error::Numeric(_))));
    }

    #[test]
    fn connected_is_hermitian() {
        let hams = [
            Hamiltonian::Precipice(PrecipiceHamiltonian::new(7, 0.8).unwrap()),
            Hamiltonian::J1J2(J1J2Hamiltonian::new(3, 3, 1.0, 0.6, Boundary::Periodic).unwrap()),
            Hamiltonian::J1J2(J1J2Hamiltonian::new(4, 2, 0.7, 0.3, Boundary::Open).unwrap()),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for h in &hams {
            let n = h.n_sites();
            for _ in 0..200 {
                let x = SpinConfiguration::new(rng.random::<u64>() & ((1 << n) - 1), n).unwrap();
                for (y, hyx) in h.connected(x) {
                    let back: Vec<f64> =
                        h.connected(y).into_iter().filter(|(z, _)| *z == x).map(|(_, v)| v).collect();
                    assert_eq!(back.len(), 1, "{x:?} -> {y:?}");
                    assert_eq!(back[0], hyx);
                }
            }
        }
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = HamiltonianSpec::J1j2 { lx: 4, ly: 5, j1: 1.0, j2: 0.695, boundary: Boundary::Open };
        let text = toml::to_string(&spec).unwrap();
        let back: HamiltonianSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let p: HamiltonianSpec = toml::from_str("kind = \"precipice\"\nn = 32").unwrap();
        assert_eq!(p, HamiltonianSpec::Precipice { n: 32, s: 0.8 });
    }
}
