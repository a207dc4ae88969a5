//! Inference from probing experiments: spectrum range, node count and the
//! Jacobian itself.
//!
//! Everything here consumes trajectories produced by a [`ProbeTarget`] plus
//! the known probe parameters; ground truth is only used for error reports.

mod node_count;
mod pipeline;
mod reconstruct;
mod record;
mod scan;
mod target;

pub use node_count::{estimate_node_count, NodeCountEstimate, MIN_LAMBDA2_OVER_OMEGA};
pub use pipeline::{
    infer_network, infer_network_with_scan, BurnIn, FrequencyReference, InferenceSettings, NetworkInference, NodeCountPolicy, StageTiming,
    WindowSampling,
};
pub use reconstruct::{
    entry_correlation, estimate_pseudo_inverse_entry, frobenius_relative_error, reconstruct_jacobian, JacobianEstimate,
    MeasurementPolicy, CONSTANT_MODE_MIN_OVERLAP, DEFAULT_RECONSTRUCTION_ZERO_TOL, MIN_ABS_SINE,
};
pub use record::ResponseRecord;
pub use scan::{log_spaced, responding_fraction, scan_spectrum, ScanSettings, SpectrumScanResult, RESPONSE_FLOOR};
pub use target::{LinearizedSystem, ProbeTarget, SimulatedSystem, SAMPLES_PER_PERIOD};

use crate::dynamics::DynamicsError;
use crate::linalg::LinalgError;

/// Pipeline stage, used to tag errors and timings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Scan,
    NodeCount,
    Probing,
    Reconstruction,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Scan => "scan-spectrum",
            Stage::NodeCount => "estimate-n",
            Stage::Probing => "probing",
            Stage::Reconstruction => "reconstruction",
        })
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum InferenceError {
    #[error("invalid setting: {0}")]
    InvalidSetting(String),
    #[error("no record of the probed node {0}")]
    MissingProbedRecord(usize),
    #[error("probed node response {peak_to_peak:e} is below the floor; the probe is too weak to assess")]
    ProbeTooWeak { peak_to_peak: f64 },
    #[error("fraction never crosses {level} in [{f_min}, {f_max}]; widen the scan range")]
    NoCrossing { level: f64, f_min: f64, f_max: f64 },
    #[error("spectrum bounds are inverted: lambda2_hat = {lambda2} > lambdan_hat = {lambdan}")]
    InvertedBounds { lambda2: f64, lambdan: f64 },
    #[error("measurement window {window} is shorter than the probe period {period}")]
    WindowTooShort { window: f64, period: f64 },
    #[error("omega0 = {omega0} exceeds the low-frequency limit {limit}")]
    FrequencyTooHigh { omega0: f64, limit: f64 },
    #[error("no sample with |sin(omega0 t)| >= {min_sine} in the measurement window")]
    NoAdmissibleSample { min_sine: f64 },
    #[error("peak response is zero; cannot estimate the node count")]
    ZeroResponse,
    #[error("constant-mode overlap {overlap} is below {min}; the estimate is too corrupted")]
    ConstantModeLost { overlap: f64, min: f64 },
    #[error("true matrix has zero norm")]
    ZeroReference,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operation needs the ground-truth Jacobian, which this target does not expose")]
    MissingGroundTruth,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{stage} stage failed: {source}")]
    InStage { stage: Stage, source: Box<InferenceError> },
}

impl InferenceError {
    pub(crate) fn at(self, stage: Stage) -> Self {
        match self {
            e @ InferenceError::InStage { .. } => e,
            e => InferenceError::InStage { stage, source: Box::new(e) },
        }
    }

    /// Stage tag, if the error came out of [`infer_network`].
    pub fn stage(&self) -> Option<Stage> {
        match self {
            InferenceError::InStage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}
