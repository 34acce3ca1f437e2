//! Error types shared across the simulation modules.

use thiserror::Error;

/// Failures raised while building operators or propagating states.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("hamiltonian is not hermitian (max deviation {dev:.3e})")]
    NonHermitian { dev: f64 },

    #[error("time step must be positive and finite, got {dt}")]
    BadStep { dt: f64 },

    #[error("propagation interval is reversed: t0 = {t0}, t1 = {t1}")]
    ReversedInterval { t0: f64, t1: f64 },

    #[error("population {pop:.3e} in top guard level exceeds leakage tolerance {tol:.1e}")]
    LeakageExceeded { pop: f64, tol: f64 },

    #[error("state trace deviates from one by {dev:.3e}")]
    TraceLost { dev: f64 },

    #[error("projective reset branch has vanishing probability ({prob:.3e})")]
    EmptyBranch { prob: f64 },

    #[error("dimension mismatch: state is {state} but operator is {operator}")]
    DimensionMismatch { state: usize, operator: usize },

    #[error("stroke must start on a stroke boundary: local time {t_local:.6} in a cycle of {tau}")]
    MisalignedStroke { t_local: f64, tau: f64 },

    #[error("eigendecomposition failed: {0}")]
    Linalg(String),

    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Failures raised by the phonon-thermometry fitting pipeline.
#[derive(Debug, Error)]
pub enum FitError {
    #[error("scan and signal lengths differ: {times} times vs {values} values")]
    LengthMismatch { times: usize, values: usize },

    #[error("no cutoff up to {max_cutoff} reaches total occupation {floor}")]
    NoFeasibleCutoff { max_cutoff: usize, floor: f64 },

    #[error("fit needs at least {needed} scan points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("least-squares solve failed: {0}")]
    Solver(String),

    #[error("invalid parameter: {0}")]
    BadParameter(String),
}
