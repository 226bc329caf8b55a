use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SampledProtocol, SuccessRule};
use super::stats::mean_std;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::model::{Ansatz, Wavefunction};
use crate::sampler::{exact_sector_ensemble, exact_symmetric_ensemble, MetropolisChain, SamplerSpec, MAX_SECTOR_DIM};
use crate::sr::StepController;
use crate::tempering::{Replica, ReplicaPool};

/// One line of a run's event stream, ordered by step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Temperatures { step: usize, temperatures: Vec<f64> },
    Update { step: usize, slot: usize, replica: usize, temperature: f64, energy: f64, eta: f64 },
    Swap { step: usize, attempt: usize, slot: usize, probability: f64, accepted: bool },
    Candidate { step: usize, mean_energy: f64, standard_error: f64, accepted: bool },
    Success { step: usize, energy: f64 },
    Failure { step: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub events: Vec<Event>,
    /// First update after which the success rule held.
    pub success_step: Option<usize>,
    /// Energy of the zero-temperature replica at the end: exact when the
    /// sector can be enumerated, otherwise its last running mean.
    pub final_energy: Option<f64>,
    pub final_temperatures: Vec<f64>,
    /// Set when the run stopped on a numeric failure.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.success_step.is_some()
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn swap_attempts(&self) -> usize {
        let mut attempts: Vec<usize> = self
            .events
            .iter()
            .filter_map(|e| match e {
                Event::Swap { attempt, .. } => Some(*attempt),
                _ => None,
            })
            .collect();
        attempts.dedup();
        attempts.len()
    }
}

/// SplitMix64 mixing of a base seed with a stream label.
pub fn derive_seed(base: u64, labels: &[u64]) -> u64 {
    let mut z = base;
    for &l in labels {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15 ^ l.wrapping_mul(0xBF58_476D_1CE4_E5B9));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

const STREAM_ANSATZ: u64 = 1;
const STREAM_CHAIN: u64 = 2;
const STREAM_COORDINATOR: u64 = 3;
const STREAM_VERIFY: u64 = 4;

/// Exact `⟨H⟩` of `psi` if its sampler's sector can be enumerated.
pub fn exact_energy(psi: &Ansatz, h: &Hamiltonian, sampler: &SamplerSpec) -> Result<Option<f64>> {
    let n = psi.n_sites();
    let batch = match sampler {
        SamplerSpec::ExactSymmetric => exact_symmetric_ensemble(psi, h, false)?,
        _ => {
            let Some(w) = sampler.sector_weight(n) else { return Ok(None) };
            if !h.conserves_weight() || crate::basis::binomial(n, w) > MAX_SECTOR_DIM as u64 {
                return Ok(None);
            }
            exact_sector_ensemble(psi, h, w, false)?
        }
    };
    Ok(Some(batch.energy()))
}

/// Outcome of a frozen-parameter resampling check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledCheck {
    pub mean_energy: f64,
    pub standard_error: f64,
    pub confirmed: bool,
}

/// Draws `rounds` batches of `samples` from `psi` and accepts if the mean
/// of the batch means sits at least one standard error below `threshold`.
pub fn resample_check(
    psi: &Ansatz,
    h: &Hamiltonian,
    chain: &mut MetropolisChain,
    threshold: f64,
    rounds: usize,
    samples: usize,
) -> Result<SampledCheck> {
    let sampler = SamplerSpec::Metropolis { samples, weight: Some(chain.state().weight()) };
    let mut means = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        means.push(sampler.draw(psi, h, Some(chain), false)?.energy());
    }
    let (mean_energy, std) = mean_std(&means);
    let standard_error = std / (rounds as f64).sqrt();
    Ok(SampledCheck { mean_energy, standard_error, confirmed: mean_energy < threshold - standard_error })
}

/// Running-window trigger of the sampled success rule.
#[derive(Clone, Debug)]
pub struct SampledDetector {
    protocol: SampledProtocol,
    threshold: f64,
    window: VecDeque<(f64, f64)>,
}

impl SampledDetector {
    pub fn new(protocol: SampledProtocol, threshold: f64) -> Self {
        Self { protocol, threshold, window: VecDeque::with_capacity(protocol.window) }
    }

    /// Adds one `(energy, std)` estimate and reports whether the window
    /// mean sits below the threshold by more than the required fraction of
    /// the mean std.
    pub fn push(&mut self, energy: f64, std: f64) -> bool {
        if self.window.len() == self.protocol.window {
            self.window.pop_front();
        }
        self.window.push_back((energy, std));
        if self.window.len() < self.protocol.window {
            return false;
        }
        let len = self.window.len() as f64;
        let mean = self.window.iter().map(|w| w.0).sum::<f64>() / len;
        let mean_std = self.window.iter().map(|w| w.1).sum::<f64>() / len;
        mean < self.threshold - self.protocol.std_fraction * mean_std
    }

    /// Forget the window so a new trigger needs a full window of data.
    pub fn reset(&mut self) {
        self.window.clear();
    }
}

/// Sampled success rule for one replica: window trigger, then a frozen
/// resampling check.
pub fn detect_success_sampled(
    detector: &mut SampledDetector,
    energy: f64,
    std: f64,
    psi: &Ansatz,
    h: &Hamiltonian,
    chain: &mut MetropolisChain,
) -> Result<Option<SampledCheck>> {
    if !detector.push(energy, std) {
        return Ok(None);
    }
    let p = detector.protocol;
    let check = resample_check(psi, h, chain, detector.threshold, p.rounds, p.samples)?;
    detector.reset();
    Ok(Some(check))
}

fn is_run_failure(e: &Error) -> bool {
    matches!(e, Error::Numeric(_) | Error::Controller(_) | Error::Solver(_))
}

/// Resolved threshold and evaluation cadence for one experiment.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Judge {
    pub rule: SuccessRule,
    pub threshold: f64,
}

impl Judge {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let weight = config.training.sampler.sector_weight(config.ansatz.n_sites());
        let threshold = match config.success {
            SuccessRule::None => f64::NAN,
            SuccessRule::ThresholdExact { threshold, .. } | SuccessRule::ThresholdSampled { threshold, .. } => {
                threshold.resolve(&config.hamiltonian, weight)?
            }
        };
        Ok(Self { rule: config.success, threshold })
    }

    fn exact_hit(&self, energy: f64) -> bool {
        match self.rule {
            SuccessRule::ThresholdExact { relative_tolerance: Some(tol), .. } => {
                (energy - self.threshold).abs() <= tol * self.threshold.abs()
            }
            SuccessRule::ThresholdExact { relative_tolerance: None, .. } => energy < self.threshold,
            _ => false,
        }
    }
}

struct RunState {
    record: RunRecord,
    attempt: usize,
    detector: Option<SampledDetector>,
    candidate: Option<(usize, Ansatz, MetropolisChain)>,
}

/// One full training run: every replica takes an SR step per update, swaps
/// and temperature updates follow the schedule, success is latched.
pub fn run_single(config: &ExperimentConfig, h: &Hamiltonian, run: usize) -> Result<RunRecord> {
    let judge = Judge::new(config)?;
    run_with_judge(config, h, &judge, run)
}

pub(crate) fn run_with_judge(config: &ExperimentConfig, h: &Hamiltonian, judge: &Judge, run: usize) -> Result<RunRecord> {
    let seed = derive_seed(config.seed, &[run as u64]);
    let temps = config.temperatures()?;
    let n = config.ansatz.n_sites();
    let sampler = config.training.sampler;
    let mut payloads = Vec::with_capacity(temps.len());
    for k in 0..temps.len() {
        let ansatz = Ansatz::random(&config.ansatz, derive_seed(seed, &[STREAM_ANSATZ, k as u64]), config.init_scale)?;
        let controller = StepController::new(config.learning_rate)?;
        let chain = sampler.new_chain(n, derive_seed(seed, &[STREAM_CHAIN, k as u64]))?;
        payloads.push(Replica::new(k, ansatz, controller, chain));
    }
    let optimize_lowest = config.tempering.map(|t| t.optimize_lowest_slot).unwrap_or(false);
    let mut pool = ReplicaPool::new(&temps, payloads)?.with_lowest_slot_optimized(optimize_lowest);
    let mut coordinator = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[STREAM_COORDINATOR]));

    let detector = match config.success {
        SuccessRule::ThresholdSampled { protocol, .. } => Some(SampledDetector::new(protocol, judge.threshold)),
        _ => None,
    };
    let mut state = RunState {
        record: RunRecord {
            run,
            seed,
            events: vec![Event::Temperatures { step: 0, temperatures: temps.clone() }],
            success_step: None,
            final_energy: None,
            final_temperatures: temps,
            failure: None,
        },
        attempt: 0,
        detector,
        candidate: None,
    };

    for step in 1..=config.total_updates {
        match advance(config, h, judge, &mut pool, &mut coordinator, &mut state, step) {
            Ok(()) => {}
            Err(e) if is_run_failure(&e) => {
                let reason = e.to_string();
                state.record.events.push(Event::Failure { step, reason: reason.clone() });
                state.record.failure = Some(reason);
                state.record.final_temperatures = pool.temperatures();
                return Ok(state.record);
            }
            Err(e) => return Err(e),
        }
    }

    if let (Some((step, psi, mut chain)), SuccessRule::ThresholdSampled { protocol, .. }) =
        (state.candidate.take(), config.success)
    {
        let check = resample_check(&psi, h, &mut chain, judge.threshold, protocol.confirm_rounds, protocol.confirm_samples)?;
        if check.confirmed {
            state.record.success_step = Some(step);
            state.record.events.push(Event::Success { step, energy: check.mean_energy });
        }
    }
    let zero = &pool.payloads()[0];
    state.record.final_energy = match exact_energy(&zero.ansatz, h, &sampler) {
        Ok(Some(e)) => Some(e),
        Ok(None) => pool.running_energy(0),
        Err(e) if is_run_failure(&e) => None,
        Err(e) => return Err(e),
    };
    state.record.final_temperatures = pool.temperatures();
    Ok(state.record)
}

fn advance(
    config: &ExperimentConfig,
    h: &Hamiltonian,
    judge: &Judge,
    pool: &mut ReplicaPool<Replica>,
    coordinator: &mut ChaCha8Rng,
    state: &mut RunState,
    step: usize,
) -> Result<()> {
    let temps = pool.temperatures();
    let reports: Vec<_> = pool
        .payloads_mut()
        .par_iter_mut()
        .enumerate()
        .map(|(slot, r)| r.update(h, temps[slot], &config.training))
        .collect::<Result<_>>()?;
    let trace = step % config.trace_every == 0;
    for (slot, report) in reports.iter().enumerate() {
        let energy = report.moments.energy;
        pool.update_running_energy(slot, energy)?;
        if trace {
            let replica = pool.payloads()[slot].id;
            state.record.events.push(Event::Update {
                step,
                slot,
                replica,
                temperature: temps[slot],
                energy,
                eta: report.eta,
            });
        }
    }
    check_success(config, h, judge, pool, state, step, reports[0].moments.energy, reports[0].moments.energy_std)?;

    if let Some(t) = config.tempering {
        if t.optimize_temperatures && step >= t.burn_in && step % t.temp_update_period == 0 {
            let updates = pool.optimize_temperatures()?;
            if updates.iter().any(|u| u.accepted) {
                state.record.events.push(Event::Temperatures { step, temperatures: pool.temperatures() });
            }
        }
        if step % t.n_swap == 0 {
            if step >= t.swap_start {
                state.attempt += 1;
                for o in pool.attempt_swaps(coordinator)? {
                    state.record.events.push(Event::Swap {
                        step,
                        attempt: state.attempt,
                        slot: o.slot,
                        probability: o.probability,
                        accepted: o.accepted,
                    });
                }
            } else {
                pool.close_windows();
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_success(
    config: &ExperimentConfig,
    h: &Hamiltonian,
    judge: &Judge,
    pool: &mut ReplicaPool<Replica>,
    state: &mut RunState,
    step: usize,
    energy: f64,
    energy_std: f64,
) -> Result<()> {
    if state.record.success_step.is_some() || state.candidate.is_some() {
        return Ok(());
    }
    let sampler = config.training.sampler;
    match judge.rule {
        SuccessRule::None => {}
        SuccessRule::ThresholdExact { check_every, .. } => {
            let exact_sampler = !matches!(sampler, SamplerSpec::Metropolis { .. });
            // moments of an exact ensemble are already exact, but describe
            // the parameters before this update
            let e = if exact_sampler {
                Some(energy)
            } else if step % check_every == 0 {
                exact_energy(&pool.payloads()[0].ansatz, h, &sampler)?
            } else {
                None
            };
            if let Some(e) = e {
                if judge.exact_hit(e) {
                    state.record.success_step = Some(step);
                    state.record.events.push(Event::Success { step, energy: e });
                }
            }
        }
        SuccessRule::ThresholdSampled { .. } => {
            let Some(detector) = state.detector.as_mut() else { return Ok(()) };
            let zero = &pool.payloads()[0];
            let mut chain = match &zero.chain {
                Some(c) => c.clone(),
                None => MetropolisChain::new(
                    zero.ansatz.n_sites(),
                    sampler.sector_weight(zero.ansatz.n_sites()).unwrap_or(zero.ansatz.n_sites() / 2),
                    derive_seed(state.record.seed, &[STREAM_VERIFY, step as u64]),
                )?,
            };
            if let Some(check) = detect_success_sampled(detector, energy, energy_std, &zero.ansatz, h, &mut chain)? {
                state.record.events.push(Event::Candidate {
                    step,
                    mean_energy: check.mean_energy,
                    standard_error: check.standard_error,
                    accepted: check.confirmed,
                });
                if check.confirmed {
                    state.candidate = Some((step, zero.ansatz.clone(), chain));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_per_label() {
        let a = derive_seed(1, &[0]);
        let b = derive_seed(1, &[1]);
        let c = derive_seed(2, &[0]);
        assert!(a != b && a != c && b != c);
        assert_eq!(derive_seed(5, &[1, 2]), derive_seed(5, &[1, 2]));
        assert_ne!(derive_seed(5, &[1, 2]), derive_seed(5, &[2, 1]));
    }

    #[test]
    fn detector_needs_a_full_window_and_a_margin() {
        let protocol = SampledProtocol { window: 3, ..SampledProtocol::default() };
        let mut d = SampledDetector::new(protocol, -10.0);
        // exactly at threshold never triggers
        for _ in 0..10 {
            assert!(!d.push(-10.0, 0.0));
        }
        let mut d = SampledDetector::new(protocol, -10.0);
        assert!(!d.push(-11.0, 0.3));
        assert!(!d.push(-11.0, 0.3));
        assert!(d.push(-11.0, 0.3));
        // margin of a third of the std
        let mut d = SampledDetector::new(protocol, -10.0);
        for _ in 0..3 {
            d.push(-10.5, 3.0);
        }
        assert!(!d.push(-10.5, 3.0));
    }
}
