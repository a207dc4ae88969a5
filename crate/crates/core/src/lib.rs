//! Recovering the interaction network of diffusively coupled dynamical
//! systems from their response to small sinusoidal probing signals.
//!
//! The numeric core is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix it to `f64`, which is what the tolerances in the docs assume.

pub mod dynamics;
pub mod graph;
pub mod inference;
pub mod laplacian;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod scalar;

pub use graph::{erdos_renyi, load_graph, parse_edge_list, watts_strogatz, Graph, GraphError};
pub use scalar::Scalar;

pub type Laplacian = laplacian::WeightedLaplacian<f64>;
pub type Spectrum = linalg::SpectralDecomposition<f64>;
pub type System = dynamics::SystemSpec<f64>;
pub type Probe = dynamics::ProbeSignal<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type FixedPoint = dynamics::FixedPoint<f64>;
pub type Coupling = dynamics::Coupling<f64>;
pub type ResponseRecord = inference::ResponseRecord<f64>;
pub type JacobianEstimate = inference::JacobianEstimate<f64>;
pub type SpectrumScan = inference::SpectrumScanResult<f64>;
pub type NodeCountEstimate = inference::NodeCountEstimate<f64>;

pub type Laplacian32 = laplacian::WeightedLaplacian<f32>;
pub type Spectrum32 = linalg::SpectralDecomposition<f32>;
pub type System32 = dynamics::SystemSpec<f32>;
