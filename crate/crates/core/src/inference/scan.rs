//! Spectrum-range estimation by sweeping the probe frequency and counting
//! how many nodes follow.

use crate::dynamics::ProbeSignal;
use crate::scalar::Scalar;

use super::record::ResponseRecord;
use super::target::ProbeTarget;
use super::InferenceError;

/// Probed-node peak-to-peak responses below this are indistinguishable
/// from round-off in `y - y*` for states of order one.
pub const RESPONSE_FLOOR: f64 = 1e-12;

/// `n_act / n`: node `j` responds when its peak-to-peak deviation exceeds
/// `threshold_ratio` times the probed node's.
pub fn responding_fraction<T: Scalar>(records: &[ResponseRecord<T>], threshold_ratio: T) -> Result<T, InferenceError> {
    let first = records.first().ok_or(InferenceError::MissingProbedRecord(0))?;
    let probed = first.probe.node;
    let own = records
        .iter()
        .find(|r| r.node == probed)
        .ok_or(InferenceError::MissingProbedRecord(probed))?
        .peak_to_peak();
    if !(own > T::lit(RESPONSE_FLOOR)) {
        return Err(InferenceError::ProbeTooWeak { peak_to_peak: own.as_f64() });
    }
    let active = records.iter().filter(|r| r.peak_to_peak() > threshold_ratio * own).count();
    Ok(T::count(active) / T::count(records.len()))
}

/// `points` frequencies from `f_min` to `f_max`, equally spaced in log.
pub fn log_spaced<T: Scalar>(f_min: T, f_max: T, points: usize) -> Vec<T> {
    if points == 1 {
        return vec![f_min];
    }
    let (a, b) = (f_min.ln(), f_max.ln());
    (0..points)
        .map(|k| {
            if k == 0 {
                f_min
            } else if k + 1 == points {
                f_max
            } else {
                (a + (b - a) * T::count(k) / T::count(points - 1)).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings<T> {
    pub f_min: T,
    pub f_max: T,
    pub points: usize,
    pub amplitude: T,
    pub threshold_ratio: T,
    /// `lambda2_hat` is read where the fraction last sits at or above this.
    pub lambda2_level: T,
    /// `lambdan_hat` is read where the fraction first drops to or below this.
    pub lambdan_level: T,
    /// Stop descending once this many consecutive frequencies sit at or
    /// above `lambda2_level`; zero scans the whole grid.
    pub plateau_points: usize,
}

impl<T: Scalar> ScanSettings<T> {
    /// Defaults for an `n`-node system: 51 points over `[1e-3, 1e2]`,
    /// threshold 0.1, `lambda2_hat` at fraction 0.9, `lambdan_hat` where
    /// only the probed node still responds (fraction `1.5 / n`), and an
    /// early stop after four plateau points.
    pub fn new(n: usize, amplitude: T) -> Self {
        Self {
            f_min: T::lit(1e-3),
            f_max: T::lit(1e2),
            points: 51,
            amplitude,
            threshold_ratio: T::lit(0.1),
            lambda2_level: T::lit(0.9),
            lambdan_level: T::lit(1.5) / T::count(n.max(1)),
            plateau_points: 4,
        }
    }

    fn validate(&self) -> Result<(), InferenceError> {
        if !(self.f_min > T::zero() && self.f_min < self.f_max && self.f_max.is_finite()) {
            return Err(InferenceError::InvalidSetting(format!(
                "need 0 < f_min < f_max (got {}, {})",
                self.f_min, self.f_max
            )));
        }
        if self.points < 8 {
            return Err(InferenceError::InvalidSetting(format!("scan needs at least 8 points, got {}", self.points)));
        }
        if !(self.amplitude > T::zero()) || !(self.threshold_ratio > T::zero()) {
            return Err(InferenceError::InvalidSetting("amplitude and threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumScanResult<T> {
    pub frequencies: Vec<T>,
    pub responding_fraction: Vec<T>,
    pub lambda2_hat: T,
    pub lambdan_hat: T,
}

impl<T: Scalar> SpectrumScanResult<T> {
    /// Applies the crossing rules of `settings` to a measured curve.
    pub fn from_curve(frequencies: Vec<T>, fraction: Vec<T>, settings: &ScanSettings<T>) -> Result<Self, InferenceError> {
        let no_crossing = |level: T| InferenceError::NoCrossing {
            level: level.as_f64(),
            f_min: frequencies[0].as_f64(),
            f_max: frequencies[frequencies.len() - 1].as_f64(),
        };
        let interp = |k: usize, level: T| {
            let (f0, f1) = (frequencies[k].ln(), frequencies[k + 1].ln());
            let (y0, y1) = (fraction[k], fraction[k + 1]);
            let s = if y1 == y0 { T::lit(0.5) } else { (level - y0) / (y1 - y0) };
            (f0 + s * (f1 - f0)).exp()
        };

        let hi = settings.lambda2_level;
        let k2 = fraction.iter().rposition(|&f| f >= hi).ok_or_else(|| no_crossing(hi))?;
        if k2 + 1 == fraction.len() {
            return Err(no_crossing(hi));
        }
        let lambda2_hat = interp(k2, hi);

        let lo = settings.lambdan_level;
        let kn = fraction.iter().position(|&f| f <= lo).ok_or_else(|| no_crossing(lo))?;
        if kn == 0 {
            return Err(no_crossing(lo));
        }
        let lambdan_hat = interp(kn - 1, lo);

        if lambda2_hat > lambdan_hat {
            return Err(InferenceError::InvertedBounds { lambda2: lambda2_hat.as_f64(), lambdan: lambdan_hat.as_f64() });
        }
        Ok(Self { frequencies, responding_fraction: fraction, lambda2_hat, lambdan_hat })
    }
}

/// Frequencies evaluated together before the plateau rule is checked. Fixed
/// so that where the scan stops does not depend on the thread count.
const SCAN_CHUNK: usize = 4;

/// Probes `node` once per log-spaced frequency, from the highest down. Each
/// run waits one probe period and then measures over the next one.
///
/// Low frequencies are by far the most expensive to simulate; with
/// `plateau_points > 0` the descent stops once the collective plateau is
/// established and the curve is reported from there upward.
pub fn scan_spectrum<T: Scalar, P: ProbeTarget<T> + ?Sized>(
    target: &P,
    node: usize,
    settings: &ScanSettings<T>,
) -> Result<SpectrumScanResult<T>, InferenceError> {
    use rayon::prelude::*;

    settings.validate()?;
    let grid = log_spaced(settings.f_min, settings.f_max, settings.points);
    let measure = |w: T| {
        let probe = ProbeSignal::new(node, settings.amplitude, w);
        let p = probe.period();
        let traj = target.probe(&probe, p, p + p)?;
        let records = ResponseRecord::all_nodes(&traj, &probe, p, p);
        let f = responding_fraction(&records, settings.threshold_ratio)?;
        log::debug!("scan omega0 = {:.4e}: fraction {:.4}", w.as_f64(), f.as_f64());
        Ok(f)
    };

    let descending: Vec<T> = grid.iter().rev().copied().collect();
    let chunk = if settings.plateau_points == 0 { descending.len() } else { SCAN_CHUNK };
    let mut fractions = Vec::with_capacity(descending.len());
    let mut run = 0;
    'outer: for ws in descending.chunks(chunk) {
        let got = ws.par_iter().map(|&w| measure(w)).collect::<Result<Vec<T>, InferenceError>>()?;
        for f in got {
            fractions.push(f);
            run = if f >= settings.lambda2_level { run + 1 } else { 0 };
            if settings.plateau_points > 0 && run >= settings.plateau_points {
                break 'outer;
            }
        }
    }
    let kept = fractions.len();
    let frequencies = grid[grid.len() - kept..].to_vec();
    fractions.reverse();
    SpectrumScanResult::from_curve(frequencies, fractions, settings)
}
