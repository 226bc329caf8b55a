//! Configuration ensembles: exact weight-class sums, exact fixed-weight
//! enumeration and Metropolis exchange chains, plus moment estimation.

mod batch;
mod exact;
mod metropolis;

pub use batch::{estimate_moments, SampleBatch};
pub use exact::{exact_sector_ensemble, exact_symmetric_ensemble, MAX_DERIVATIVE_ENTRIES, MAX_SECTOR_DIM};
pub use metropolis::{metropolis_exchange, MetropolisChain};

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::hamiltonian::Hamiltonian;
use crate::model::Wavefunction;

/// Sampler selection as written in experiment configs. A missing `weight`
/// means `n / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    ExactSymmetric,
    ExactSector {
        #[serde(default)]
        weight: Option<usize>,
    },
    Metropolis {
        samples: usize,
        #[serde(default)]
        weight: Option<usize>,
    },
}

impl SamplerSpec {
    pub fn sector_weight(&self, n: usize) -> Option<usize> {
        match *self {
            Self::ExactSymmetric => None,
            Self::ExactSector { weight } | Self::Metropolis { weight, .. } => Some(weight.unwrap_or(n / 2)),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(w) = self.sector_weight(n) {
            if w > n {
                return config_err(format!("sector weight {w} exceeds {n} sites"));
            }
        }
        if let Self::Metropolis { samples: 0, .. } = self {
            return config_err("metropolis sample count must be positive");
        }
        Ok(())
    }

    /// Fresh chain for a replica, if this sampler needs one.
    pub fn new_chain(&self, n: usize, seed: u64) -> Result<Option<MetropolisChain>> {
        match *self {
            Self::Metropolis { .. } => Ok(Some(MetropolisChain::new(n, self.sector_weight(n).unwrap_or(0), seed)?)),
            _ => Ok(None),
        }
    }

    pub fn draw<W: Wavefunction + Sync + ?Sized>(
        &self,
        psi: &W,
        h: &Hamiltonian,
        chain: Option<&mut MetropolisChain>,
        derivatives: bool,
    ) -> Result<SampleBatch> {
        let n = psi.n_sites();
        match *self {
            Self::ExactSymmetric => exact_symmetric_ensemble(psi, h, derivatives),
            Self::ExactSector { .. } => exact_sector_ensemble(psi, h, self.sector_weight(n).unwrap_or(0), derivatives),
            Self::Metropolis { samples, .. } => match chain {
                Some(chain) => metropolis_exchange(psi, h, samples, chain, derivatives),
                None => config_err("metropolis sampling needs a chain"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{binomial, FixedWeightBasis};
    use crate::hamiltonian::{symmetric_sector_matrix, Boundary, J1J2Hamiltonian, PrecipiceHamiltonian};
    use crate::model::{Ansatz, AnsatzShape, ParameterVector, Rbm, SpinConfiguration, SymmetricRbm};
    use crate::sr::EstimatedMoments;
    use crate::Error;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Ansatz whose log-amplitudes are offset by a constant.
    struct Shifted<'a> {
        inner: &'a Ansatz,
        shift: C64,
    }

    impl Wavefunction for Shifted<'_> {
        fn n_sites(&self) -> usize {
            self.inner.n_sites()
        }
        fn parameters(&self) -> &ParameterVector {
            self.inner.parameters()
        }
        fn parameters_mut(&mut self) -> &mut ParameterVector {
            unreachable!()
        }
        fn log_amplitude(&self, x: SpinConfiguration) -> Result<C64> {
            Ok(self.inner.log_amplitude(x)? + self.shift)
        }
        fn log_derivatives_into(&self, x: SpinConfiguration, out: &mut [C64]) -> Result<C64> {
            Ok(self.inner.log_derivatives_into(x, out)? + self.shift)
        }
    }

    fn heisenberg(lx: usize, ly: usize) -> Hamiltonian {
        Hamiltonian::J1J2(J1J2Hamiltonian::new(lx, ly, 1.0, 0.0, Boundary::Open).unwrap())
    }

    fn precipice(n: usize) -> Hamiltonian {
        Hamiltonian::Precipice(PrecipiceHamiltonian::new(n, 0.8).unwrap())
    }

    #[test]
    fn uniform_symmetric_ensemble_is_binomial() {
        for n in [2usize, 7, 32] {
            let psi = SymmetricRbm::zeros(n, 3);
            let batch = exact_symmetric_ensemble(&psi, &precipice(n), false).unwrap();
            assert_eq!(batch.len(), n + 1);
            for (w, p) in batch.weights().iter().enumerate() {
                let want = binomial(n, w) as f64 / 2f64.powi(n as i32);
                assert!((p - want).abs() < 1e-14, "n={n} w={w}");
            }
            assert!((batch.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let b2 = exact_symmetric_ensemble(&SymmetricRbm::zeros(2, 1), &precipice(2), false).unwrap();
        assert_eq!(b2.weights(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn symmetric_energy_matches_sector_quadratic_form() {
        for (n, seed) in [(5usize, 1u64), (12, 2), (32, 3)] {
            let shape = AnsatzShape::SymmetricRbm { n, hidden: 4 };
            let psi = Ansatz::random(&shape, seed, 0.3).unwrap();
            let hp = PrecipiceHamiltonian::new(n, 0.8).unwrap();
            let m = symmetric_sector_matrix(&hp);
            let batch = exact_symmetric_ensemble(&psi, &Hamiltonian::Precipice(hp), false).unwrap();
            let Ansatz::SymmetricRbm(sym) = &psi else { unreachable!() };
            let v = DVector::from_fn(n + 1, |w, _| {
                (binomial(n, w) as f64).sqrt() * sym.log_amplitude_for_weight(w).unwrap().exp()
            });
            let v = &v / C64::new(v.norm(), 0.0);
            let mc = m.map(|x| C64::new(x, 0.0));
            let want = v.dotc(&(&mc * &v)).re;
            assert!((batch.energy() - want).abs() < 1e-10, "n={n}: {} vs {want}", batch.energy());
        }
    }

    #[test]
    fn symmetric_ensemble_rejects_non_symmetric_hamiltonian() {
        let psi = SymmetricRbm::zeros(4, 2);
        assert!(matches!(exact_symmetric_ensemble(&psi, &heisenberg(2, 2), false), Err(Error::Config(_))));
    }

    #[test]
    fn sector_ensemble_sizes_and_uniform_weights() {
        let psi = Rbm::zeros(4, 2);
        let batch = exact_sector_ensemble(&psi, &heisenberg(2, 2), 2, false).unwrap();
        assert_eq!(batch.len(), 6);
        assert!(batch.weights().iter().all(|p| (p - 1.0 / 6.0).abs() < 1e-15));
        assert!(batch.configurations().iter().all(|x| x.weight() == 2));
        assert_eq!(FixedWeightBasis::new(20, 10, MAX_SECTOR_DIM).unwrap().dim(), 184_756);
        let big = Rbm::zeros(40, 1);
        let h = Hamiltonian::J1J2(J1J2Hamiltonian::new(8, 5, 1.0, 0.0, Boundary::Open).unwrap());
        assert!(matches!(exact_sector_ensemble(&big, &h, 20, false), Err(Error::Capacity(_))));
    }

    fn dense_hamiltonian(h: &Hamiltonian) -> DMatrix<f64> {
        let n = h.n_sites();
        let dim = 1usize << n;
        let mut m = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let x = SpinConfiguration::new(c as u64, n).unwrap();
            h.for_each_connected(x, |y, v| m[(y.bits() as usize, c)] += v);
        }
        m
    }

    /// Moments from the full state vector with the uncentered formulas.
    fn brute_force_moments(psi: &Ansatz, h: &Hamiltonian, weight: usize, t: f64) -> (f64, DVector<C64>, DMatrix<C64>) {
        let n = h.n_sites();
        let hd = dense_hamiltonian(h);
        let states: Vec<usize> = (0..1usize << n).filter(|b| (*b as u64).count_ones() as usize == weight).collect();
        let amp: Vec<C64> =
            states.iter().map(|&b| psi.log_amplitude(SpinConfiguration::new(b as u64, n).unwrap()).unwrap().exp()).collect();
        let norm: f64 = amp.iter().map(|a| a.norm_sqr()).sum();
        let p: Vec<f64> = amp.iter().map(|a| a.norm_sqr() / norm).collect();
        let e_loc: Vec<C64> = states
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let h_psi: C64 = states.iter().zip(&amp).map(|(&c, a)| a * hd[(b, c)]).sum();
                h_psi / amp[i]
            })
            .collect();
        let g: Vec<C64> = e_loc.iter().zip(&amp).map(|(e, a)| e + t * a.norm_sqr().ln()).collect();
        let o: Vec<Vec<C64>> = states
            .iter()
            .map(|&b| psi.log_derivatives(SpinConfiguration::new(b as u64, n).unwrap()).unwrap())
            .collect();
        let k = psi.n_params();
        let mean = |f: &dyn Fn(usize) -> C64| -> C64 { (0..states.len()).map(|i| f(i) * p[i]).sum() };
        let g_mean = mean(&|i| g[i]);
        let force = DVector::from_fn(k, |a, _| mean(&|i| o[i][a].conj() * g[i]) - mean(&|i| o[i][a].conj()) * g_mean);
        let s = DMatrix::from_fn(k, k, |a, b| {
            mean(&|i| o[i][a].conj() * o[i][b]) - mean(&|i| o[i][a].conj()) * mean(&|i| o[i][b])
        });
        (mean(&|i| e_loc[i]).re, force, s)
    }

    #[test]
    fn moments_match_brute_force_definition() {
        let h = Hamiltonian::J1J2(J1J2Hamiltonian::new(3, 2, 1.0, 0.4, Boundary::Open).unwrap());
        let psi = Ansatz::random(&AnsatzShape::Rbm { n: 6, hidden: 3 }, 17, 0.4).unwrap();
        for t in [0.0, 0.8] {
            let batch = exact_sector_ensemble(&psi, &h, 3, true).unwrap();
            let m = estimate_moments(&batch, t).unwrap();
            let (e, f, s) = brute_force_moments(&psi, &h, 3, t);
            assert!((m.energy - e).abs() < 1e-10);
            assert!((&m.force - f).camax() < 1e-10);
            assert!((m.covariance.to_dense() - s).camax() < 1e-10);
        }
    }

    #[test]
    fn covariance_is_hermitian_and_positive_semidefinite() {
        let h = heisenberg(2, 3);
        let psi = Ansatz::random(&AnsatzShape::Rbm { n: 6, hidden: 4 }, 4, 0.5).unwrap();
        let batch = exact_sector_ensemble(&psi, &h, 3, true).unwrap();
        let s = estimate_moments(&batch, 0.3).unwrap().covariance.to_dense();
        assert!((&s - s.adjoint()).camax() < 1e-12);
        let min = s.symmetric_eigenvalues().min();
        assert!(min >= -1e-10, "{min}");
    }

    fn moments_for<W: Wavefunction + Sync>(psi: &W, h: &Hamiltonian, t: f64) -> EstimatedMoments {
        let batch = match h {
            Hamiltonian::Precipice(_) => exact_symmetric_ensemble(psi, h, true),
            Hamiltonian::J1J2(_) => exact_sector_ensemble(psi, h, psi.n_sites() / 2, true),
        };
        estimate_moments(&batch.unwrap(), t).unwrap()
    }

    #[test]
    fn moments_are_gauge_invariant() {
        let cases = [
            (Ansatz::random(&AnsatzShape::Rbm { n: 6, hidden: 3 }, 8, 0.5).unwrap(), heisenberg(3, 2)),
            (Ansatz::random(&AnsatzShape::SymmetricRbm { n: 10, hidden: 3 }, 9, 0.5).unwrap(), precipice(10)),
        ];
        for (psi, h) in &cases {
            for t in [0.0, 1.3] {
                let base = moments_for(psi, h, t);
                let shifted = Shifted { inner: psi, shift: C64::new(3.7, -1.2) };
                let moved = moments_for(&shifted, h, t);
                assert!((&base.force - &moved.force).camax() < 1e-10);
                assert!((base.covariance.to_dense() - moved.covariance.to_dense()).camax() < 1e-10);
                assert!((base.energy - moved.energy).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_temperature_force_is_energy_force() {
        let h = heisenberg(2, 2);
        let psi = Ansatz::random(&AnsatzShape::Rbm { n: 4, hidden: 2 }, 3, 0.5).unwrap();
        let batch = exact_sector_ensemble(&psi, &h, 2, true).unwrap();
        let m = estimate_moments(&batch, 0.0).unwrap();
        let o = batch.derivatives().unwrap();
        let w = batch.weights();
        let e = batch.local_energies();
        for k in 0..psi.n_params() {
            let oe: C64 = (0..batch.len()).map(|i| o[(i, k)].conj() * e[i] * w[i]).sum();
            let om: C64 = (0..batch.len()).map(|i| o[(i, k)].conj() * w[i]).sum();
            let em: C64 = (0..batch.len()).map(|i| e[i] * w[i]).sum();
            assert!((m.force[k] - (oe - om * em)).norm() < 1e-12);
        }
    }

    /// `⟨H⟩ - T S` with the normalized entropy `S = -Σ p ln p`.
    fn free_energy(psi: &Ansatz, h: &Hamiltonian, t: f64) -> f64 {
        let batch = match h {
            Hamiltonian::Precipice(_) => exact_symmetric_ensemble(psi, h, false).unwrap(),
            Hamiltonian::J1J2(_) => exact_sector_ensemble(psi, h, psi.n_sites() / 2, false).unwrap(),
        };
        let class_size = |x: SpinConfiguration| match h {
            Hamiltonian::Precipice(_) => binomial(x.n(), x.weight()) as f64,
            Hamiltonian::J1J2(_) => 1.0,
        };
        let entropy: f64 = batch
            .weights()
            .iter()
            .zip(batch.configurations())
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, x)| -p * (p / class_size(*x)).ln())
            .sum();
        batch.energy() - t * entropy
    }

    fn check_force_against_finite_differences(psi: &Ansatz, h: &Hamiltonian, t: f64) {
        let m = moments_for(psi, h, t);
        let step = 1e-5;
        for k in 0..psi.n_params() {
            let eval = |delta: C64| {
                let mut q = psi.clone();
                q.parameters_mut().values_mut()[k] += delta;
                free_energy(&q, h, t)
            };
            let du = (eval(C64::new(step, 0.0)) - eval(C64::new(-step, 0.0))) / (2.0 * step);
            let dv = (eval(C64::new(0.0, step)) - eval(C64::new(0.0, -step))) / (2.0 * step);
            let fd = C64::new(du, dv) * 0.5;
            let err = (m.force[k] - fd).norm() / fd.norm().max(1.0);
            assert!(err < 1e-6, "k={k} T={t}: {} vs {fd} ({err:e})", m.force[k]);
        }
    }

    #[test]
    fn force_is_gradient_of_free_energy_two_sites() {
        let h = heisenberg(2, 1);
        for seed in 0..5 {
            let psi = Ansatz::random(&AnsatzShape::Rbm { n: 2, hidden: 3 }, seed, 0.6).unwrap();
            for t in [0.0, 0.5, 2.0] {
                check_force_against_finite_differences(&psi, &h, t);
            }
        }
    }

    #[test]
    fn force_is_gradient_of_free_energy_symmetric() {
        let h = precipice(8);
        for seed in 0..3 {
            let psi = Ansatz::random(&AnsatzShape::SymmetricRbm { n: 8, hidden: 3 }, seed, 0.3).unwrap();
            for t in [0.0, 0.7] {
                check_force_against_finite_differences(&psi, &h, t);
            }
        }
    }

    #[test]
    fn uniform_chain_accepts_everything_and_keeps_weight() {
        let psi = Rbm::zeros(10, 2);
        let mut chain = MetropolisChain::new(10, 4, 1).unwrap();
        let samples = chain.sample(&psi, 10_000).unwrap();
        assert_eq!(chain.acceptance_rate(), 1.0);
        assert!(samples.iter().all(|x| x.weight() == 4));
    }

    #[test]
    fn chain_preserves_weight_for_random_wavefunction() {
        let psi = Ansatz::random(&AnsatzShape::Rbm { n: 12, hidden: 4 }, 2, 0.8).unwrap();
        let mut chain = MetropolisChain::new(12, 6, 7).unwrap();
        let samples = chain.sample(&psi, 100_000 / 12).unwrap();
        assert!(samples.iter().all(|x| x.weight() == 6));
        assert!(chain.acceptance_rate() < 1.0);
    }

    #[test]
    fn chain_distribution_matches_exact_probabilities() {
        let h = heisenberg(2, 2);
        let psi = Ansatz::random(&AnsatzShape::Rbm { n: 4, hidden: 3 }, 5, 0.7).unwrap();
        let exact = exact_sector_ensemble(&psi, &h, 2, false).unwrap();
        let mut chain = MetropolisChain::new(4, 2, 11).unwrap();
        let count = 1_000_000;
        let samples = chain.sample(&psi, count).unwrap();
        let mut hist = std::collections::HashMap::new();
        for x in samples {
            *hist.entry(x.bits()).or_insert(0usize) += 1;
        }
        let tv: f64 = exact
            .configurations()
            .iter()
            .zip(exact.weights())
            .map(|(x, p)| (hist.get(&x.bits()).copied().unwrap_or(0) as f64 / count as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "total variation {tv}");
    }

    #[test]
    fn chain_transitions_keep_target_stationary() {
        // Single-proposal transition counts T[a][b]; Σ_a π_a P_ab should equal π_b.
        let h = heisenberg(2, 2);
        let psi = Ansatz::random(&AnsatzShape::Rbm { n: 4, hidden: 2 }, 21, 0.9).unwrap();
        let exact = exact_sector_ensemble(&psi, &h, 2, false).unwrap();
        let basis = FixedWeightBasis::new(4, 2, 10).unwrap();
        let mut pi = [0.0; 6];
        for (x, p) in exact.configurations().iter().zip(exact.weights()) {
            pi[basis.rank(x.bits())] = *p;
        }
        let mut counts = [[0usize; 6]; 6];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for a in 0..6 {
            for _ in 0..50_000 {
                let start = basis.configuration(a);
                let mut chain = MetropolisChain::from_state(start, ChaCha8Rng::seed_from_u64(rng.random()));
                let mut lp = psi.log_amplitude(start).unwrap();
                chain.advance_for_test(&psi, &mut lp);
                counts[a][basis.rank(chain.state().bits())] += 1;
            }
        }
        for b in 0..6 {
            let flow: f64 = (0..6).map(|a| pi[a] * counts[a][b] as f64 / 50_000.0).sum();
            let sigma = (pi[b] / 50_000.0).sqrt() * 3.0;
            assert!((flow - pi[b]).abs() < 4.0 * sigma + 1e-3, "state {b}: {flow} vs {}", pi[b]);
        }
    }

    #[test]
    fn metropolis_batch_has_uniform_weights_and_caches() {
        let h = heisenberg(3, 2);
        let psi = Ansatz::random(&AnsatzShape::Rbm { n: 6, hidden: 3 }, 6, 0.3).unwrap();
        let spec = SamplerSpec::Metropolis { samples: 50, weight: None };
        let mut chain = spec.new_chain(6, 4).unwrap().unwrap();
        let batch = spec.draw(&psi, &h, Some(&mut chain), true).unwrap();
        assert_eq!(batch.len(), 50);
        assert!(batch.weights().iter().all(|w| (w - 0.02).abs() < 1e-15));
        assert_eq!(batch.derivatives().unwrap().shape(), (50, psi.n_params()));
        for (x, lp) in batch.configurations().iter().zip(batch.log_psi()) {
            assert_eq!(x.weight(), 3);
            assert!((*lp - psi.log_amplitude(*x).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn sampler_spec_parses() {
        let s: SamplerSpec = toml::from_str("kind = \"metropolis\"\nsamples = 200").unwrap();
        assert_eq!(s, SamplerSpec::Metropolis { samples: 200, weight: None });
        assert_eq!(s.sector_weight(20), Some(10));
        let e: SamplerSpec = toml::from_str("kind = \"exact_symmetric\"").unwrap();
        assert_eq!(e.sector_weight(32), None);
    }
}
