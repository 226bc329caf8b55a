use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::moments::Covariance;
use crate::error::{config_err, Error, Result};

/// `λ(p) = max(λ0 b^p, λ_min)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegularizationSchedule {
    pub lambda0: f64,
    pub decay: f64,
    pub lambda_min: f64,
}

impl Default for RegularizationSchedule {
    fn default() -> Self {
        Self { lambda0: 100.0, decay: 0.9, lambda_min: 1e-4 }
    }
}

impl RegularizationSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda0 >= 0.0
            && self.lambda_min >= 0.0
            && self.decay > 0.0
            && self.decay <= 1.0
            && self.lambda0.is_finite();
        if !ok {
            return config_err(format!("invalid regularization schedule {self:?}"));
        }
        Ok(())
    }

    pub fn lambda(&self, step: usize) -> f64 {
        let p = i32::try_from(step).unwrap_or(i32::MAX);
        (self.lambda0 * self.decay.powi(p)).max(self.lambda_min)
    }
}

/// Hermitian linear operator `v ↦ A v`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DVector<C64>) -> DVector<C64>;
}

/// `s` with its diagonal scaled by `1 + λ`.
#[derive(Clone, Debug)]
pub struct RegularizedCovariance<'a> {
    covariance: &'a Covariance,
    shift: DVector<f64>,
}

pub fn regularize(covariance: &Covariance, lambda: f64) -> RegularizedCovariance<'_> {
    let shift = covariance.diagonal() * lambda;
    RegularizedCovariance { covariance, shift }
}

impl RegularizedCovariance<'_> {
    pub fn diagonal(&self) -> DVector<f64> {
        self.covariance.diagonal() + &self.shift
    }
}

impl LinearOperator for RegularizedCovariance<'_> {
    fn dim(&self) -> usize {
        self.covariance.dim()
    }

    fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = self.covariance.apply(v);
        for ((o, s), x) in out.iter_mut().zip(self.shift.iter()).zip(v.iter()) {
            *o += x * *s;
        }
        out
    }
}

impl LinearOperator for Covariance {
    fn dim(&self) -> usize {
        Covariance::dim(self)
    }

    fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        Covariance::apply(self, v)
    }
}

impl LinearOperator for nalgebra::DMatrix<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        self * v
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Minres,
    Cg,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { kind: SolverKind::Minres, tol: 1e-6, max_iter: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub solution: DVector<C64>,
    pub iterations: usize,
    /// `‖A x - b‖ / ‖b‖`, recomputed from the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
}

pub fn solve<A: LinearOperator + ?Sized>(op: &A, rhs: &DVector<C64>, config: &SolverConfig) -> Result<SolveOutcome> {
    if rhs.len() != op.dim() {
        return config_err(format!("right-hand side has length {}, operator {}", rhs.len(), op.dim()));
    }
    if !(config.tol > 0.0) {
        return config_err(format!("solver tolerance must be positive, got {}", config.tol));
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite force vector".into()));
    }
    match config.kind {
        SolverKind::Minres => minres(op, rhs, config.tol, config.max_iter),
        SolverKind::Cg => conjugate_gradient(op, rhs, config.tol, config.max_iter),
    }
}

fn finish<A: LinearOperator + ?Sized>(
    op: &A,
    rhs: &DVector<C64>,
    solution: DVector<C64>,
    iterations: usize,
    tol: f64,
) -> Result<SolveOutcome> {
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("solver produced non-finite entries".into()));
    }
    let b_norm = rhs.norm();
    let relative_residual = if b_norm == 0.0 { 0.0 } else { (op.apply(&solution) - rhs).norm() / b_norm };
    if !relative_residual.is_finite() {
        return Err(Error::Numeric("non-finite residual; operator has non-finite entries".into()));
    }
    Ok(SolveOutcome { solution, iterations, relative_residual, converged: relative_residual <= tol })
}

/// MINRES for Hermitian (possibly singular or indefinite) systems, started
/// from zero. Iterates stay in the Krylov space of `b`, which lies in the
/// range of `A` whenever `b` does, so the limit is the minimum-norm solution.
pub fn minres<A: LinearOperator + ?Sized>(op: &A, b: &DVector<C64>, tol: f64, max_iter: usize) -> Result<SolveOutcome> {
    let dim = b.len();
    let zero = DVector::from_element(dim, C64::new(0.0, 0.0));
    let beta1 = b.norm();
    if beta1 == 0.0 {
        return finish(op, b, zero, 0, tol);
    }
    let mut x = zero.clone();
    let mut r1 = b.clone();
    let mut r2 = b.clone();
    let mut w = zero.clone();
    let mut w2 = zero;
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln) = (0.0, 0.0);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let v = &r2 / C64::new(beta, 0.0);
        let mut y = op.apply(&v);
        if iterations >= 2 {
            y.axpy(C64::new(-beta / oldb, 0.0), &r1, C64::new(1.0, 0.0));
        }
        let alpha = v.dotc(&y).re;
        y.axpy(C64::new(-alpha / beta, 0.0), &r2, C64::new(1.0, 0.0));
        r1 = std::mem::replace(&mut r2, y);
        oldb = beta;
        beta = r2.norm();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alpha;
        let gbar = sn * dbar - cs * alpha;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON * beta1);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let w1 = std::mem::replace(&mut w2, w.clone());
        w = (&v - &w1 * C64::new(oldeps, 0.0) - &w2 * C64::new(delta, 0.0)) / C64::new(gamma, 0.0);
        x.axpy(C64::new(phi, 0.0), &w, C64::new(1.0, 0.0));

        if !phibar.is_finite() || !alpha.is_finite() {
            return Err(Error::Numeric("non-finite value inside MINRES".into()));
        }
        if phibar <= tol * beta1 || beta <= f64::EPSILON * beta1 {
            break;
        }
    }
    finish(op, b, x, iterations, tol)
}

/// Conjugate gradient for Hermitian positive-definite systems.
pub fn conjugate_gradient<A: LinearOperator + ?Sized>(
    op: &A,
    b: &DVector<C64>,
    tol: f64,
    max_iter: usize,
) -> Result<SolveOutcome> {
    let dim = b.len();
    let mut x = DVector::from_element(dim, C64::new(0.0, 0.0));
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return finish(op, b, x, 0, tol);
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let mut iterations = 0;
    while iterations < max_iter && rr.sqrt() > tol * b_norm {
        iterations += 1;
        let ap = op.apply(&p);
        let pap = p.dotc(&ap).re;
        if !(pap > 0.0) {
            break;
        }
        let step = C64::new(rr / pap, 0.0);
        x.axpy(step, &p, C64::new(1.0, 0.0));
        r.axpy(-step, &ap, C64::new(1.0, 0.0));
        let rr_new = r.norm_squared();
        p = &r + &p * C64::new(rr_new / rr, 0.0);
        rr = rr_new;
    }
    finish(op, b, x, iterations, tol)
}
