//! Stochastic reconfiguration: covariance regularization, Krylov solves and
//! step-size control.

mod controller;
mod moments;
mod solver;

pub use controller::{
    Drift, ErrorNorm, LearningRate, StepController, StepReport, MAX_CONSECUTIVE_REJECTIONS, MAX_STEP, MIN_STEP,
};
pub use moments::{Covariance, EstimatedMoments, DENSE_COVARIANCE_LIMIT};
pub use solver::{
    conjugate_gradient, minres, regularize, solve, LinearOperator, RegularizationSchedule, RegularizedCovariance,
    SolveOutcome, SolverConfig, SolverKind,
};

use crate::error::Result;

/// `d = (s + λ diag s)⁻¹ f` for the given moments.
pub fn sr_direction(moments: EstimatedMoments, lambda: f64, solver: &SolverConfig) -> Result<Drift> {
    let solve = solve(&regularize(&moments.covariance, lambda), &moments.force, solver)?;
    Ok(Drift { direction: solve.solution.clone(), moments, solve })
}
