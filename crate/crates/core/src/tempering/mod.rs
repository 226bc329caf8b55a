//! Replica-exchange bookkeeping: temperature ladders, neighbor swaps,
//! running energies and adaptive inverse temperatures.

mod replica;

pub use replica::{Replica, TrainingSpec};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitShape {
    #[default]
    Cubic,
    Linear,
}

impl InitShape {
    fn exponent(self) -> i32 {
        match self {
            Self::Cubic => 3,
            Self::Linear => 1,
        }
    }
}

/// Ladder `T_0 = 0`, `T_k = T_min + (T_max - T_min) ((k-1)/(n-2))^e` for
/// `k = 1..n-1`.
pub fn init_temperatures(n_replicas: usize, t_min: f64, t_max: f64, shape: InitShape) -> Result<Vec<f64>> {
    if n_replicas < 3 {
        return config_err(format!("need at least 3 replicas, got {n_replicas}"));
    }
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return config_err(format!("temperature bounds must satisfy 0 < t_min < t_max, got [{t_min}, {t_max}]"));
    }
    let span = (n_replicas - 2) as f64;
    let mut temps = vec![0.0];
    for k in 1..n_replicas {
        let u = ((k - 1) as f64 / span).powi(shape.exponent());
        temps.push(t_min + (t_max - t_min) * u);
    }
    // pin the endpoints to the exact bounds
    temps[1] = t_min;
    temps[n_replicas - 1] = t_max;
    Ok(temps)
}

/// `min(1, exp[(β_i - β_j)(Ē_i - Ē_j)])`; with `β_i = ∞` the rule becomes
/// `1` if `Ē_i > Ē_j` and `0` otherwise.
pub fn swap_probability(beta_i: f64, beta_j: f64, energy_i: f64, energy_j: f64) -> f64 {
    if beta_i.is_infinite() {
        return if energy_i > energy_j { 1.0 } else { 0.0 };
    }
    let exponent = (beta_i - beta_j) * (energy_i - energy_j);
    if exponent >= 0.0 {
        1.0
    } else {
        exponent.exp()
    }
}

/// Swap exponent `(β_i - β_{i+1})(Ē_i - Ē_{i+1})`.
pub fn swap_exponent(beta_i: f64, beta_j: f64, energy_i: f64, energy_j: f64) -> f64 {
    (beta_i - beta_j) * (energy_i - energy_j)
}

/// Proposed `β_i*` from the neighbors' inverse temperatures and running
/// energies; `None` when the energy gaps cancel.
pub fn proposed_beta(betas: [f64; 3], energies: [f64; 3]) -> Option<f64> {
    let lower_gap = energies[0] - energies[1];
    let upper_gap = energies[1] - energies[2];
    let denom = lower_gap + upper_gap;
    if denom == 0.0 {
        return None;
    }
    Some(0.5 * (betas[1] + (betas[0] * lower_gap + betas[2] * upper_gap) / denom))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapOutcome {
    /// Lower slot of the pair; the partner is `slot + 1`.
    pub slot: usize,
    pub probability: f64,
    pub accepted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureUpdate {
    pub slot: usize,
    pub old_beta: f64,
    pub proposed_beta: Option<f64>,
    pub accepted: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct EnergyWindow {
    sum: f64,
    count: usize,
    /// Mean of the last closed window.
    closed: Option<f64>,
}

impl EnergyWindow {
    fn mean(&self) -> Option<f64> {
        if self.count > 0 {
            Some(self.sum / self.count as f64)
        } else {
            self.closed
        }
    }

    fn close(&mut self) {
        self.closed = self.mean();
        self.sum = 0.0;
        self.count = 0;
    }
}

/// Temperature slots with the payloads currently attached to them.
///
/// Slot 0 sits at `T = 0`. Slots 1 and `n - 1` keep `T_min` and `T_max`;
/// the interior inverse temperatures may be re-optimized. Payloads move
/// between slots on accepted swaps while the temperatures stay put.
#[derive(Clone, Debug)]
pub struct ReplicaPool<P> {
    betas: Vec<f64>,
    windows: Vec<EnergyWindow>,
    payloads: Vec<P>,
    odd_parity: bool,
    optimize_lowest: bool,
}

impl<P> ReplicaPool<P> {
    /// `temperatures[0]` must be 0 and the rest strictly increasing.
    pub fn new(temperatures: &[f64], payloads: Vec<P>) -> Result<Self> {
        if temperatures.is_empty() || temperatures.len() != payloads.len() {
            return config_err(format!(
                "{} temperatures for {} payloads (need at least 1)",
                temperatures.len(),
                payloads.len()
            ));
        }
        if temperatures[0] != 0.0 {
            return config_err("slot 0 must be at zero temperature");
        }
        if !temperatures.windows(2).all(|w| w[0] < w[1]) || !temperatures.iter().all(|t| t.is_finite()) {
            return config_err("temperatures must be finite and strictly increasing");
        }
        let betas = temperatures.iter().map(|&t| if t == 0.0 { f64::INFINITY } else { 1.0 / t }).collect();
        Ok(Self {
            betas,
            windows: vec![EnergyWindow::default(); payloads.len()],
            payloads,
            odd_parity: false,
            optimize_lowest: false,
        })
    }

    /// Also lets slot 1 move during temperature optimization.
    pub fn with_lowest_slot_optimized(mut self, enabled: bool) -> Self {
        self.optimize_lowest = enabled;
        self
    }

    pub fn len(&self) -> usize {
        self.payloads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payloads.is_empty()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn temperatures(&self) -> Vec<f64> {
        self.betas.iter().map(|b| if b.is_infinite() { 0.0 } else { 1.0 / b }).collect()
    }

    pub fn temperature(&self, slot: usize) -> f64 {
        let b = self.betas[slot];
        if b.is_infinite() {
            0.0
        } else {
            1.0 / b
        }
    }

    pub fn payloads(&self) -> &[P] {
        &self.payloads
    }

    pub fn payloads_mut(&mut self) -> &mut [P] {
        &mut self.payloads
    }

    pub fn into_payloads(self) -> Vec<P> {
        self.payloads
    }

    /// True if the next attempt pairs `(1,2), (3,4), ...`.
    pub fn odd_parity(&self) -> bool {
        self.odd_parity
    }

    /// Adds one per-update energy estimate to slot `slot`'s running window.
    pub fn update_running_energy(&mut self, slot: usize, energy: f64) -> Result<f64> {
        if !energy.is_finite() {
            return Err(Error::Numeric(format!("non-finite energy {energy} in slot {slot}")));
        }
        let w = &mut self.windows[slot];
        w.sum += energy;
        w.count += 1;
        Ok(w.sum / w.count as f64)
    }

    /// Mean of the estimates since the last swap attempt, or of the last
    /// closed window if none have arrived yet.
    pub fn running_energy(&self, slot: usize) -> Option<f64> {
        self.windows[slot].mean()
    }

    fn running_energies(&self) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                self.running_energy(i)
                    .ok_or_else(|| Error::Config(format!("slot {i} has no energy estimate yet")))
            })
            .collect()
    }

    /// Closes every running-energy window without attempting swaps.
    pub fn close_windows(&mut self) {
        for w in &mut self.windows {
            w.close();
        }
    }

    /// One swap attempt over the disjoint pairs of the current parity. Every
    /// pair draws one uniform from `rng`. Windows are closed afterwards and
    /// the parity flips.
    pub fn attempt_swaps<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<SwapOutcome>> {
        let energies = self.running_energies()?;
        let first = usize::from(self.odd_parity);
        let mut outcomes = Vec::new();
        let mut slot = first;
        while slot + 1 < self.len() {
            let p = swap_probability(self.betas[slot], self.betas[slot + 1], energies[slot], energies[slot + 1]);
            let accepted = rng.random::<f64>() < p;
            if accepted {
                self.payloads.swap(slot, slot + 1);
            }
            outcomes.push(SwapOutcome { slot, probability: p, accepted });
            slot += 2;
        }
        for w in &mut self.windows {
            w.close();
        }
        // the closed means describe the configurations, so they follow them
        for o in outcomes.iter().filter(|o| o.accepted) {
            let (a, b) = (self.windows[o.slot].closed, self.windows[o.slot + 1].closed);
            self.windows[o.slot].closed = b;
            self.windows[o.slot + 1].closed = a;
        }
        self.odd_parity = !self.odd_parity;
        Ok(outcomes)
    }

    /// Moves interior inverse temperatures towards equal neighbor swap
    /// exponents: odd slots first, then even slots against the updated odd
    /// neighbors. Proposals outside `(β_{i+1}, β_{i-1})` are rejected.
    pub fn optimize_temperatures(&mut self) -> Result<Vec<TemperatureUpdate>> {
        let n = self.len();
        if n < 4 {
            return Ok(Vec::new());
        }
        let energies = self.running_energies()?;
        let first = if self.optimize_lowest { 1 } else { 2 };
        let mut updates = Vec::new();
        for parity in [1, 0] {
            for i in (first..=n - 2).filter(|i| i % 2 == parity) {
                let betas = [self.betas[i - 1], self.betas[i], self.betas[i + 1]];
                let proposed = proposed_beta(betas, [energies[i - 1], energies[i], energies[i + 1]]);
                let accepted = matches!(proposed, Some(b) if betas[0] > b && b > betas[2]);
                if accepted {
                    self.betas[i] = proposed.expect("accepted proposal");
                }
                updates.push(TemperatureUpdate { slot: i, old_beta: betas[1], proposed_beta: proposed, accepted });
            }
        }
        Ok(updates)
    }

}
