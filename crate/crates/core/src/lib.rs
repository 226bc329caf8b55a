//! Variational Monte Carlo for neural-network quantum states, trained with
//! stochastic reconfiguration on an entropy-regularized free-energy cost and
//! wrapped in parallel tempering with adaptively optimized temperatures.
//!
//! Layout:
//! - [`model`]: complex RBM, permutation-symmetric RBM and GELU feedforward ansatzes.
//! - [`hamiltonian`]: the Precipice and J1-J2 Hamiltonians with sparse row access.
//! - [`sampler`]: exact ensembles, fixed-weight Metropolis chains and moment estimation.
//! - [`sr`]: covariance regularization, Krylov solvers and the adaptive Heun step.
//! - [`tempering`]: replica pools, neighbor swaps and temperature optimization.
//! - [`oracle`]: exact reference spectra (dense sector solve and sector Lanczos).
//! - [`harness`]: experiment configs, ensembles of runs, statistics and plot data.

pub mod basis;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod sampler;
pub mod sr;
pub mod tempering;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
