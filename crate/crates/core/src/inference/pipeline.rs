//! End-to-end reconstruction: scan, node count, one probe per node, assembly.

use std::time::{Duration, Instant};

use ndarray::Array2;
use rayon::prelude::*;

use crate::dynamics::ProbeSignal;
use crate::scalar::Scalar;

use super::node_count::{estimate_node_count, NodeCountEstimate};
use super::reconstruct::{
    entry_correlation, estimate_pseudo_inverse_entry, frobenius_relative_error, reconstruct_jacobian, JacobianEstimate,
    MeasurementPolicy, DEFAULT_RECONSTRUCTION_ZERO_TOL,
};
use super::record::ResponseRecord;
use super::scan::{scan_spectrum, ScanSettings, SpectrumScanResult};
use super::target::ProbeTarget;
use super::{InferenceError, Stage};

/// What `freq_ratio` multiplies to give `omega0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyReference {
    /// `lambda2_hat` from the scan.
    #[default]
    Estimated,
    /// The target's true `lambda2` (ablation; needs ground truth).
    True,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeCountPolicy<T> {
    /// Measure `n_hat` at `freq_ratio` times the reference `lambda2`.
    Estimate { freq_ratio: T },
    /// Use a known count (ablation).
    Known(usize),
}

/// Waiting time before the measurement window of each probing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BurnIn<T> {
    /// `10 / lambda2` of the frequency reference.
    Auto,
    Fixed(T),
    /// Total run length; the window is the last period before it.
    Horizon(T),
}

impl<T: Scalar> BurnIn<T> {
    /// Burn-in for a run at `period` when the reference Fiedler value is `lambda2`.
    pub fn resolve(self, lambda2: T, period: T) -> Result<T, InferenceError> {
        match self {
            BurnIn::Auto => Ok(T::lit(10.0) / lambda2),
            BurnIn::Fixed(b) if b >= T::zero() => Ok(b),
            BurnIn::Horizon(h) if h >= period => Ok(h - period),
            BurnIn::Fixed(b) => Err(InferenceError::InvalidSetting(format!("negative burn-in {b}"))),
            BurnIn::Horizon(h) => Err(InferenceError::WindowTooShort { window: h.as_f64(), period: period.as_f64() }),
        }
    }
}

/// Which samples of the measurement window enter each `J^+_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSampling<T> {
    /// Every admissible sample of the window.
    Average,
    /// The single sample nearest `phase` periods into the window.
    Single { phase: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceSettings<T> {
    pub amplitude: T,
    pub freq_ratio: T,
    pub reference: FrequencyReference,
    pub node_count: NodeCountPolicy<T>,
    pub scan: ScanSettings<T>,
    /// Node used for the scan and the node-count run.
    pub scan_node: usize,
    pub burn_in: BurnIn<T>,
    pub sampling: WindowSampling<T>,
    /// Run one experiment per ordered pair `(i, j)` and keep only `x_j^i`.
    pub pairs_only: bool,
    pub zero_tol: T,
}

impl<T: Scalar> InferenceSettings<T> {
    pub fn new(n: usize, amplitude: T) -> Self {
        Self {
            amplitude,
            freq_ratio: T::lit(0.01),
            reference: FrequencyReference::Estimated,
            node_count: NodeCountPolicy::Estimate { freq_ratio: T::lit(0.01) },
            scan: ScanSettings::new(n, amplitude),
            scan_node: 0,
            burn_in: BurnIn::Auto,
            sampling: WindowSampling::Average,
            pairs_only: false,
            zero_tol: T::lit(DEFAULT_RECONSTRUCTION_ZERO_TOL),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTiming {
    pub stage: Stage,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInference<T> {
    pub scan: SpectrumScanResult<T>,
    /// `None` when the node count was supplied.
    pub node_count: Option<NodeCountEstimate<T>>,
    pub lambda2_reference: T,
    pub omega0: T,
    pub burn_in: T,
    /// Raw `J^+_ij` before symmetrization; row `i` is the probed node.
    pub raw_pinv: Array2<T>,
    /// `max |J^+_ij - J^+_ji|` of the raw estimate.
    pub asymmetry: T,
    pub estimate: JacobianEstimate<T>,
    /// Entrywise correlation with the true Jacobian, when known.
    pub correlation: Option<T>,
    pub timings: Vec<StageTiming>,
}

/// Probes `node` at `omega` and returns every node's record over the
/// one-period window that follows `burn_in`.
fn measure<T: Scalar, P: ProbeTarget<T> + ?Sized>(
    target: &P,
    node: usize,
    amplitude: T,
    omega: T,
    burn_in: T,
) -> Result<(ProbeSignal<T>, crate::dynamics::Trajectory<T>), InferenceError> {
    let probe = ProbeSignal::new(node, amplitude, omega);
    let traj = target.probe(&probe, burn_in, burn_in + probe.period())?;
    Ok((probe, traj))
}

/// Runs the full reconstruction against `target`.
pub fn infer_network<T: Scalar, P: ProbeTarget<T> + ?Sized>(
    target: &P,
    settings: &InferenceSettings<T>,
) -> Result<NetworkInference<T>, InferenceError> {
    validate(target, settings)?;
    let clock = Instant::now();
    let scan = scan_spectrum(target, settings.scan_node, &settings.scan).map_err(|e| e.at(Stage::Scan))?;
    log::info!("scan: lambda2_hat = {:.6e}, lambdan_hat = {:.6e}", scan.lambda2_hat.as_f64(), scan.lambdan_hat.as_f64());
    let mut out = infer_network_with_scan(target, settings, scan)?;
    out.timings.insert(0, StageTiming { stage: Stage::Scan, elapsed: clock.elapsed() });
    Ok(out)
}

fn validate<T: Scalar, P: ProbeTarget<T> + ?Sized>(target: &P, settings: &InferenceSettings<T>) -> Result<(), InferenceError> {
    let n = target.node_count();
    if settings.scan_node >= n {
        return Err(InferenceError::InvalidSetting(format!("scan node {} outside 0..{n}", settings.scan_node)));
    }
    if !(settings.freq_ratio > T::zero()) || !(settings.amplitude > T::zero()) {
        return Err(InferenceError::InvalidSetting("frequency ratio and amplitude must be positive".into()));
    }
    Ok(())
}

/// [`infer_network`] with the spectrum scan already done, e.g. when
/// sweeping the frequency ratio.
pub fn infer_network_with_scan<T: Scalar, P: ProbeTarget<T> + ?Sized>(
    target: &P,
    settings: &InferenceSettings<T>,
    scan: SpectrumScanResult<T>,
) -> Result<NetworkInference<T>, InferenceError> {
    validate(target, settings)?;
    let n = target.node_count();
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |stage: Stage, timings: &mut Vec<StageTiming>| {
        timings.push(StageTiming { stage, elapsed: clock.elapsed() });
        clock = Instant::now();
    };
    let lambda2_reference = match settings.reference {
        FrequencyReference::Estimated => scan.lambda2_hat,
        FrequencyReference::True => target
            .ground_truth_spectrum()
            .map(|d| d.values[1])
            .ok_or(InferenceError::MissingGroundTruth)
            .map_err(|e| e.at(Stage::Scan))?,
    };

    let omega0 = settings.freq_ratio * lambda2_reference;
    let period = T::TAU() / omega0;
    let burn_in = settings.burn_in.resolve(lambda2_reference, period).map_err(|e| e.at(Stage::Probing))?;

    // Node count; the scan node's probing run is reused when the frequencies agree.
    let mut reused = None;
    let (node_count, n_used) = match settings.node_count {
        NodeCountPolicy::Known(k) => (None, T::count(k)),
        NodeCountPolicy::Estimate { freq_ratio } => {
            let omega = freq_ratio * lambda2_reference;
            let p = T::TAU() / omega;
            let nc_burn = settings.burn_in.resolve(lambda2_reference, p).map_err(|e| e.at(Stage::NodeCount))?;
            let run = measure(target, settings.scan_node, settings.amplitude, omega, nc_burn)
                .map_err(|e| e.at(Stage::NodeCount))?;
            let record = ResponseRecord::from_trajectory(&run.1, &run.0, settings.scan_node, nc_burn, p);
            let est = estimate_node_count(&record, Some(lambda2_reference)).map_err(|e| e.at(Stage::NodeCount))?;
            log::info!("node count: n_hat = {:.4} at omega0 = {:.6e}", est.n_hat.as_f64(), omega.as_f64());
            if omega == omega0 && nc_burn == burn_in && !settings.pairs_only {
                reused = Some(run);
            }
            (Some(est), est.n_hat)
        }
    };
    lap(Stage::NodeCount, &mut timings);

    // One probing run per node (or per ordered pair).
    let entry = |probe: &ProbeSignal<T>, traj: &crate::dynamics::Trajectory<T>, j: usize| {
        let rec = ResponseRecord::from_trajectory(traj, probe, j, burn_in, period);
        let policy = match settings.sampling {
            WindowSampling::Average => MeasurementPolicy::Average,
            WindowSampling::Single { phase } => MeasurementPolicy::At(burn_in + phase * period),
        };
        estimate_pseudo_inverse_entry(&rec, n_used, policy)
    };
    let raw_rows: Vec<Vec<T>> = if settings.pairs_only {
        let cells: Vec<T> = (0..n * n)
            .into_par_iter()
            .map(|cell| {
                let (i, j) = (cell / n, cell % n);
                let (probe, traj) = measure(target, i, settings.amplitude, omega0, burn_in)?;
                entry(&probe, &traj, j)
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.at(Stage::Probing))?;
        cells.chunks(n).map(<[T]>::to_vec).collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let owned;
                let (probe, traj) = match &reused {
                    Some(run) if run.0.node == i => (&run.0, &run.1),
                    _ => {
                        owned = measure(target, i, settings.amplitude, omega0, burn_in)?;
                        (&owned.0, &owned.1)
                    }
                };
                (0..n).map(|j| entry(probe, traj, j)).collect::<Result<Vec<T>, _>>()
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.at(Stage::Probing))?
    };
    drop(reused);
    let raw_pinv = Array2::from_shape_fn((n, n), |(i, j)| raw_rows[i][j]);
    let mut asymmetry = T::zero();
    for i in 0..n {
        for j in 0..i {
            asymmetry = asymmetry.max((raw_pinv[[i, j]] - raw_pinv[[j, i]]).abs());
        }
    }
    lap(Stage::Probing, &mut timings);

    // Reconstruction.
    let mut estimate = reconstruct_jacobian(raw_pinv.view(), settings.zero_tol).map_err(|e| e.at(Stage::Reconstruction))?;
    estimate.n_used = n_used;
    let mut correlation = None;
    if let Some(truth) = target.ground_truth() {
        estimate.rel_frobenius_error = Some(
            frobenius_relative_error(estimate.j_hat.view(), truth.view()).map_err(|e| e.at(Stage::Reconstruction))?,
        );
        correlation = Some(entry_correlation(estimate.j_hat.view(), truth.view()).map_err(|e| e.at(Stage::Reconstruction))?);
    }
    lap(Stage::Reconstruction, &mut timings);

    Ok(NetworkInference {
        scan,
        node_count,
        lambda2_reference,
        omega0,
        burn_in,
        raw_pinv,
        asymmetry,
        estimate,
        correlation,
        timings,
    })
}
