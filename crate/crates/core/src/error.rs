use thiserror::Error;

use crate::subspace::FeasibilityReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("no connected graph after {attempts} attempts (n={n}, kappa={kappa})")]
    Disconnected { attempts: usize, n: usize, kappa: f64 },

    #[error("matrix is not symmetric (residual {residual:.3e})")]
    Asymmetric { residual: f64 },

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error(
        "Douglas-Rachford did not converge after {iterations} iterations \
         (step residual {step_residual:.3e}, omega residual {omega_residual:.3e})"
    )]
    NotConverged {
        iterations: usize,
        step_residual: f64,
        omega_residual: f64,
    },

    #[error("designed combination matrix is infeasible for the given topology")]
    Infeasible { report: Box<FeasibilityReport> },

    #[error("run {run} diverged at iteration {iteration}")]
    Divergence { run: usize, iteration: usize },

    #[error("error recursion is unstable: rho(B) = {rho:.6}")]
    Unstable { rho: f64 },

    #[error("config error: {0}")]
    Config(String),
}
