use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::hamiltonian::{Hamiltonian, HamiltonianSpec};
use crate::model::{AnsatzShape, DEFAULT_INIT_SCALE};
use crate::oracle::{precipice_spectrum, sector_spectrum, LanczosConfig};
use crate::sr::LearningRate;
use crate::tempering::{init_temperatures, InitShape, TrainingSpec};

/// One experiment: a problem, an optimizer, an optional tempering ladder,
/// a success rule and the size of the ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub hamiltonian: HamiltonianSpec,
    pub ansatz: AnsatzShape,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    pub training: TrainingSpec,
    pub learning_rate: LearningRate,
    /// Absent means a single replica at zero temperature.
    #[serde(default)]
    pub tempering: Option<TemperingConfig>,
    pub runs: usize,
    pub total_updates: usize,
    #[serde(default)]
    pub success: SuccessRule,
    #[serde(default)]
    pub seed: u64,
    /// Keep one per-update energy row every this many updates.
    #[serde(default = "one")]
    pub trace_every: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn default_init_scale() -> f64 {
    DEFAULT_INIT_SCALE
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperingConfig {
    pub n_replicas: usize,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default)]
    pub init_shape: InitShape,
    /// Updates between swap attempts.
    pub n_swap: usize,
    /// Updates between temperature optimizations.
    #[serde(default = "default_period")]
    pub temp_update_period: usize,
    /// First update at which temperatures may be optimized.
    #[serde(default)]
    pub burn_in: usize,
    /// First update at which swaps may be attempted.
    #[serde(default)]
    pub swap_start: usize,
    #[serde(default)]
    pub optimize_temperatures: bool,
    /// Let the `T_min` slot move as well.
    #[serde(default)]
    pub optimize_lowest_slot: bool,
}

fn default_period() -> usize {
    200
}

impl TemperingConfig {
    pub fn temperatures(&self) -> Result<Vec<f64>> {
        init_temperatures(self.n_replicas, self.t_min, self.t_max, self.init_shape)
    }

    pub fn validate(&self) -> Result<()> {
        self.temperatures()?;
        if self.n_swap == 0 || self.temp_update_period == 0 {
            return config_err("n_swap and temp_update_period must be positive");
        }
        Ok(())
    }
}

/// Where a success threshold comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Threshold {
    Value(f64),
    Oracle { oracle: OracleLevel },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleLevel {
    Ground,
    FirstExcited,
}

impl Threshold {
    /// Numeric threshold, solving the exact problem if needed.
    pub fn resolve(&self, spec: &HamiltonianSpec, weight: Option<usize>) -> Result<f64> {
        let level = match *self {
            Self::Value(v) => return Ok(v),
            Self::Oracle { oracle } => oracle,
        };
        let k = match level {
            OracleLevel::Ground => 1,
            OracleLevel::FirstExcited => 2,
        };
        let spectrum = match *spec {
            HamiltonianSpec::Precipice { n, s } => precipice_spectrum(n, s, k)?,
            HamiltonianSpec::J1j2 { .. } => {
                let h = spec.build()?;
                let w = weight.unwrap_or(h.n_sites() / 2);
                sector_spectrum(&h, w, k, &LanczosConfig::default())?.spectrum
            }
        };
        Ok(spectrum.eigenvalues[k - 1])
    }
}

/// How a run is judged successful.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuccessRule {
    #[default]
    None,
    /// Exact energy of the zero-temperature replica compared with the
    /// threshold: within `relative_tolerance` of it if given, strictly
    /// below it otherwise.
    ThresholdExact {
        threshold: Threshold,
        #[serde(default)]
        relative_tolerance: Option<f64>,
        /// Updates between exact evaluations when the sampler is not exact.
        #[serde(default = "one")]
        check_every: usize,
    },
    /// Windowed sampled energies, confirmed by frozen-parameter resampling.
    ThresholdSampled {
        threshold: Threshold,
        #[serde(default)]
        protocol: SampledProtocol,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampledProtocol {
    pub window: usize,
    /// Required margin below the threshold, in units of the mean sample std.
    pub std_fraction: f64,
    pub rounds: usize,
    pub samples: usize,
    pub confirm_rounds: usize,
    pub confirm_samples: usize,
}

impl Default for SampledProtocol {
    fn default() -> Self {
        Self { window: 50, std_fraction: 1.0 / 3.0, rounds: 1000, samples: 1024, confirm_rounds: 1000, confirm_samples: 512 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Samples,
    Replicas,
    TMax,
    NetworkSize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    /// Axis values; network sizes are hidden-unit counts (the first layer
    /// for feedforward nets, which keeps the 2:1:1 shape).
    pub values: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| crate::Error::Config(format!("cannot serialize config: {e}")))
    }

    pub fn build_hamiltonian(&self) -> Result<Hamiltonian> {
        self.hamiltonian.build()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.build_hamiltonian()?;
        self.ansatz.validate()?;
        let n = self.ansatz.n_sites();
        if h.n_sites() != n {
            return config_err(format!("ansatz has {n} sites, Hamiltonian {}", h.n_sites()));
        }
        self.training.sampler.validate(n)?;
        self.training.regularization.validate()?;
        self.learning_rate.validate()?;
        if let Some(t) = &self.tempering {
            t.validate()?;
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return config_err("init_scale must be finite and >= 0");
        }
        if self.trace_every == 0 {
            return config_err("trace_every must be positive");
        }
        match self.success {
            SuccessRule::ThresholdExact { check_every: 0, .. } => return config_err("check_every must be positive"),
            SuccessRule::ThresholdSampled { protocol, .. } => {
                if protocol.window == 0 || protocol.rounds < 2 || protocol.samples == 0 {
                    return config_err("sampled success protocol needs window > 0, rounds >= 2, samples > 0");
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Zero-temperature ladder of the single-replica baseline, or the
    /// configured ladder.
    pub fn temperatures(&self) -> Result<Vec<f64>> {
        match &self.tempering {
            Some(t) => t.temperatures(),
            None => Ok(vec![0.0]),
        }
    }
}
