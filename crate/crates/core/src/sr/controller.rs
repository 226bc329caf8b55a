use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::moments::EstimatedMoments;
use super::solver::SolveOutcome;
use crate::error::{config_err, Error, Result};
use crate::model::ParameterVector;

pub const MIN_STEP: f64 = 1e-6;
pub const MAX_STEP: f64 = 1.0;
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 20;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Norm used for the Heun local-error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorNorm {
    Euclidean,
    /// `sqrt(δ† s δ)` with the unregularized covariance at the step origin.
    Metric,
    /// `δ† s δ`, the metric norm without the square root.
    #[default]
    SquaredMetric,
}

impl ErrorNorm {
    fn measure(self, delta: &DVector<C64>, covariance: &super::moments::Covariance) -> f64 {
        match self {
            Self::Euclidean => delta.norm(),
            Self::Metric => covariance.quadratic_form(delta).max(0.0).sqrt(),
            Self::SquaredMetric => covariance.quadratic_form(delta).max(0.0),
        }
    }

    /// Power of `η` the local error scales with.
    fn order(self) -> f64 {
        match self {
            Self::Euclidean | Self::Metric => 2.0,
            Self::SquaredMetric => 4.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LearningRate {
    Fixed {
        eta: f64,
    },
    AdaptiveHeun {
        tol: f64,
        #[serde(default = "default_initial_eta")]
        eta: f64,
        #[serde(default)]
        norm: ErrorNorm,
    },
}

fn default_initial_eta() -> f64 {
    1e-3
}

impl LearningRate {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Fixed { eta } => eta > 0.0 && eta.is_finite(),
            Self::AdaptiveHeun { tol, eta, .. } => tol > 0.0 && tol.is_finite() && eta > 0.0 && eta.is_finite(),
        };
        if !ok {
            return config_err(format!("invalid learning-rate settings {self:?}"));
        }
        Ok(())
    }
}

/// Update direction `d = s_reg⁻¹ f` at some parameter point, with the
/// moments it was computed from.
#[derive(Clone, Debug)]
pub struct Drift {
    pub direction: DVector<C64>,
    pub moments: EstimatedMoments,
    pub solve: SolveOutcome,
}

#[derive(Clone, Debug)]
pub struct StepReport {
    /// Moments at the parameters the step started from.
    pub moments: EstimatedMoments,
    /// Step size used by the accepted step.
    pub eta: f64,
    pub rejections: usize,
    pub error_estimate: f64,
    pub solver_converged: bool,
}

/// Step-size state of one replica's optimizer; travels with the replica on swaps.
#[derive(Clone, Debug, PartialEq)]
pub struct StepController {
    mode: LearningRate,
    eta: f64,
    steps: usize,
}

impl StepController {
    pub fn new(mode: LearningRate) -> Result<Self> {
        mode.validate()?;
        let eta = match mode {
            LearningRate::Fixed { eta } => eta,
            LearningRate::AdaptiveHeun { eta, .. } => eta.clamp(MIN_STEP, MAX_STEP),
        };
        Ok(Self { mode, eta, steps: 0 })
    }

    pub fn mode(&self) -> LearningRate {
        self.mode
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Completed steps; indexes the regularization schedule.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advances `params` by one SR step. `drift(α, p)` must return the
    /// update direction at `α` for regularization step `p`.
    pub fn step<F>(&mut self, params: &mut ParameterVector, mut drift: F) -> Result<StepReport>
    where
        F: FnMut(&ParameterVector, usize) -> Result<Drift>,
    {
        let p = self.steps;
        let start = drift(params, p)?;
        if start.direction.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            self.steps += 1;
            return Ok(StepReport {
                eta: self.eta,
                rejections: 0,
                error_estimate: 0.0,
                solver_converged: start.solve.converged,
                moments: start.moments,
            });
        }
        let report = match self.mode {
            LearningRate::Fixed { eta } => {
                axpy(params, -eta, &start.direction);
                StepReport {
                    eta,
                    rejections: 0,
                    error_estimate: 0.0,
                    solver_converged: start.solve.converged,
                    moments: start.moments,
                }
            }
            LearningRate::AdaptiveHeun { tol, norm, .. } => self.heun(params, start, tol, norm, &mut drift, p)?,
        };
        self.steps += 1;
        Ok(report)
    }

    fn heun<F>(
        &mut self,
        params: &mut ParameterVector,
        start: Drift,
        tol: f64,
        norm: ErrorNorm,
        drift: &mut F,
        p: usize,
    ) -> Result<StepReport>
    where
        F: FnMut(&ParameterVector, usize) -> Result<Drift>,
    {
        let mut rejections = 0;
        loop {
            let eta = self.eta;
            let mut trial = params.clone();
            axpy(&mut trial, -eta, &start.direction);
            let corrector = drift(&trial, p)?;
            // Heun minus Euler: -η/2 (d2 - d1)
            let diff = (&corrector.direction - &start.direction) * C64::new(-0.5 * eta, 0.0);
            let err = norm.measure(&diff, &start.moments.covariance);
            if !err.is_finite() {
                return Err(Error::Numeric("non-finite Heun error estimate".into()));
            }
            let factor = if err == 0.0 { MAX_FACTOR } else { SAFETY * (tol / err).powf(1.0 / norm.order()) };
            if err <= tol {
                let mean = (&start.direction + &corrector.direction) * C64::new(0.5, 0.0);
                axpy(params, -eta, &mean);
                self.eta = (eta * factor.clamp(MIN_FACTOR, MAX_FACTOR)).clamp(MIN_STEP, MAX_STEP);
                return Ok(StepReport {
                    eta,
                    rejections,
                    error_estimate: err,
                    solver_converged: start.solve.converged && corrector.solve.converged,
                    moments: start.moments,
                });
            }
            rejections += 1;
            if rejections > MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::Controller(format!(
                    "step rejected {rejections} consecutive times (η = {eta:e}, error {err:e} > {tol:e})"
                )));
            }
            self.eta = (eta * factor.clamp(MIN_FACTOR, 1.0)).clamp(MIN_STEP, MAX_STEP);
        }
    }
}

fn axpy(params: &mut ParameterVector, scale: f64, direction: &DVector<C64>) {
    for (a, d) in params.values_mut().iter_mut().zip(direction.iter()) {
        *a += d * scale;
    }
}
