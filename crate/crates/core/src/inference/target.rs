//! Systems under test: anything that can be probed at one node and report
//! every node's deviation from its operating point.

use crate::dynamics::{probe_response_with_noise, FixedPoint, Noise, ProbeSignal, SystemSpec, Trajectory};
use crate::laplacian::WeightedLaplacian;
use crate::linalg::SpectralDecomposition;
use crate::oracle::ModalResponse;
use crate::rng::XorShift64Star;
use crate::scalar::Scalar;

use super::InferenceError;

/// Target sampling density of recorded trajectories.
pub const SAMPLES_PER_PERIOD: usize = 2000;

/// A black box that accepts one sinusoidal probe per experiment.
pub trait ProbeTarget<T: Scalar>: Sync {
    fn node_count(&self) -> usize;

    /// Runs one experiment from rest with `probe` switched on at its start
    /// time and returns deviations `x_j(t)` for every node. Samples cover
    /// at least `[record_from, horizon]`; earlier ones may be omitted.
    fn probe(&self, probe: &ProbeSignal<T>, record_from: T, horizon: T) -> Result<Trajectory<T>, InferenceError>;

    /// The true Jacobian at the operating point, for error reports only.
    fn ground_truth(&self) -> Option<&WeightedLaplacian<T>> {
        None
    }

    /// Spectrum of [`ProbeTarget::ground_truth`].
    fn ground_truth_spectrum(&self) -> Option<&SpectralDecomposition<T>> {
        None
    }
}

/// Nonlinear simulation started at a stable fixed point.
#[derive(Debug, Clone)]
pub struct SimulatedSystem<T> {
    spec: SystemSpec<T>,
    fixed_point: FixedPoint<T>,
    dt: Option<T>,
    noise: Option<Noise<T>>,
}

impl<T: Scalar> SimulatedSystem<T> {
    pub fn new(spec: SystemSpec<T>, fixed_point: FixedPoint<T>) -> Self {
        Self { spec, fixed_point, dt: None, noise: None }
    }

    /// Forces a fixed integration step instead of the automatic rule.
    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = Some(dt);
        self
    }

    /// Adds per-step uniform noise; each experiment derives its own stream
    /// from `seed` and the probe parameters.
    pub fn with_noise(mut self, amplitude: T, seed: u64) -> Self {
        self.noise = (amplitude > T::zero()).then_some(Noise { amplitude, seed });
        self
    }

    pub fn spec(&self) -> &SystemSpec<T> {
        &self.spec
    }

    pub fn fixed_point(&self) -> &FixedPoint<T> {
        &self.fixed_point
    }

    /// `min(0.1 / lambda_n, 0.02 * period)` unless overridden.
    pub fn step_for(&self, probe: &ProbeSignal<T>) -> T {
        self.dt.unwrap_or_else(|| {
            let stiff = T::lit(0.1) / self.fixed_point.lambda_max().max(T::min_positive_value());
            stiff.min(T::lit(0.02) * probe.period())
        })
    }

    fn noise_for(&self, probe: &ProbeSignal<T>) -> Option<Noise<T>> {
        self.noise.map(|nz| {
            let mixed = nz.seed
                ^ (probe.node as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
                ^ probe.frequency.as_f64().to_bits().rotate_left(17);
            Noise { amplitude: nz.amplitude, seed: XorShift64Star::new(mixed).next_u64() }
        })
    }
}

impl<T: Scalar> ProbeTarget<T> for SimulatedSystem<T> {
    fn node_count(&self) -> usize {
        self.spec.node_count()
    }

    fn probe(&self, probe: &ProbeSignal<T>, _record_from: T, horizon: T) -> Result<Trajectory<T>, InferenceError> {
        let dt = self.step_for(probe);
        let per_sample = probe.period() / T::count(SAMPLES_PER_PERIOD);
        let stride = (per_sample / dt).floor().to_usize().unwrap_or(1).max(1);
        // Round up to whole recording strides so the last sample reaches the horizon.
        let steps = (horizon / dt).ceil().to_usize().unwrap_or(1).max(1);
        let steps = steps.div_ceil(stride) * stride;
        let horizon = T::count(steps) * dt;
        Ok(probe_response_with_noise(
            &self.spec,
            &self.fixed_point,
            probe,
            horizon,
            dt,
            stride,
            self.noise_for(probe),
        )?)
    }

    fn ground_truth(&self) -> Option<&WeightedLaplacian<T>> {
        Some(&self.fixed_point.jacobian)
    }

    fn ground_truth_spectrum(&self) -> Option<&SpectralDecomposition<T>> {
        Some(&self.fixed_point.spectrum)
    }
}

/// Exact response of `x' = -L x + xi` evaluated from the modal expansion.
#[derive(Debug, Clone)]
pub struct LinearizedSystem<T> {
    jacobian: WeightedLaplacian<T>,
    spectrum: SpectralDecomposition<T>,
}

impl<T: Scalar> LinearizedSystem<T> {
    pub fn new(jacobian: WeightedLaplacian<T>) -> Result<Self, InferenceError> {
        let spectrum = jacobian.spectrum()?;
        Ok(Self { jacobian, spectrum })
    }

    pub fn from_fixed_point(fp: &FixedPoint<T>) -> Self {
        Self { jacobian: fp.jacobian.clone(), spectrum: fp.spectrum.clone() }
    }
}

impl<T: Scalar> ProbeTarget<T> for LinearizedSystem<T> {
    fn node_count(&self) -> usize {
        self.jacobian.dim()
    }

    fn probe(&self, probe: &ProbeSignal<T>, record_from: T, horizon: T) -> Result<Trajectory<T>, InferenceError> {
        if probe.node >= self.node_count() {
            return Err(InferenceError::DimensionMismatch(probe.node, self.node_count()));
        }
        let h = probe.period() / T::count(SAMPLES_PER_PERIOD);
        let first = (record_from.max(T::zero()) / h).floor().to_usize().unwrap_or(0);
        let last = (horizon / h).ceil().to_usize().unwrap_or(0).max(first + 1);
        let times: Vec<T> = (first..=last).map(|k| T::count(k) * h).collect();
        let states = ModalResponse::new(&self.spectrum, *probe).trajectory(&times);
        Ok(Trajectory { times, states, reference: vec![T::zero(); self.node_count()] })
    }

    fn ground_truth(&self) -> Option<&WeightedLaplacian<T>> {
        Some(&self.jacobian)
    }

    fn ground_truth_spectrum(&self) -> Option<&SpectralDecomposition<T>> {
        Some(&self.spectrum)
    }
}
