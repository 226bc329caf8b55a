use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hamiltonian::Hamiltonian;
use crate::model::{Ansatz, Wavefunction};
use crate::sampler::{estimate_moments, MetropolisChain, SamplerSpec};
use crate::sr::{sr_direction, RegularizationSchedule, SolverConfig, StepController, StepReport};

/// Everything a replica needs to take one SR step besides its own state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSpec {
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub regularization: RegularizationSchedule,
}

/// Training state that moves between temperature slots: parameters,
/// step-size controller and sampler chain.
#[derive(Clone, Debug)]
pub struct Replica {
    /// Index of the slot the replica started in; stays with the payload.
    pub id: usize,
    pub ansatz: Ansatz,
    pub controller: StepController,
    pub chain: Option<MetropolisChain>,
}

impl Replica {
    pub fn new(id: usize, ansatz: Ansatz, controller: StepController, chain: Option<MetropolisChain>) -> Self {
        Self { id, ansatz, controller, chain }
    }

    /// One SR step on the free energy at `temperature`. Every drift
    /// evaluation draws a fresh batch.
    pub fn update(&mut self, h: &Hamiltonian, temperature: f64, spec: &TrainingSpec) -> Result<StepReport> {
        let Self { ansatz, controller, chain, .. } = self;
        let mut probe = ansatz.clone();
        controller.step(ansatz.parameters_mut(), |alpha, p| {
            probe.parameters_mut().values_mut().copy_from_slice(alpha.values());
            let batch = spec.sampler.draw(&probe, h, chain.as_mut(), true)?;
            let moments = estimate_moments(&batch, temperature)?;
            sr_direction(moments, spec.regularization.lambda(p), &spec.solver)
        })
    }
}
