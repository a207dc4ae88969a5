//! Nonlinear network dynamics: simulation, operating points and probing.

mod fixed_point;
mod integrate;
mod system;

pub use fixed_point::{find_fixed_point, jacobian_at, repulsive_edges, FixedPoint, STABILITY_TOL};
pub use integrate::{
    integrate, integrate_with_noise, linearity_check, probe_response, probe_response_with_noise, Noise,
    Trajectory, DIVERGENCE_FACTOR,
};
pub use system::{Coupling, CouplingKind, ProbeSignal, SystemSpec};

use crate::linalg::LinalgError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DynamicsError {
    #[error("expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("invalid probe: {0}")]
    InvalidProbe(String),
    #[error("invalid integration step: {0}")]
    InvalidStep(String),
    #[error("state diverged at t = {time} (|y|_inf = {norm:e}); the step or the probe amplitude is too large")]
    Diverged { time: f64, norm: f64 },
    #[error("fixed-point search did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("fixed point is unstable: Jacobian eigenvalue {eigenvalue:e}")]
    Unstable { eigenvalue: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
