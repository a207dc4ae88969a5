//! Pseudo-inverse entries from long-time responses, and the Jacobian from
//! the pseudo-inverse.

use ndarray::{Array2, ArrayView2};

use crate::linalg::{self, frobenius, symmetrize};
use crate::scalar::Scalar;

use super::record::ResponseRecord;
use super::InferenceError;

/// Samples are admissible when `|sin(omega0 t)|` is at least this.
pub const MIN_ABS_SINE: f64 = 0.5;
/// The constant mode must overlap `1/sqrt(n)` at least this much.
pub const CONSTANT_MODE_MIN_OVERLAP: f64 = 0.9;
/// Relative cutoff for dropping near-zero estimated modes.
pub const DEFAULT_RECONSTRUCTION_ZERO_TOL: f64 = 1e-6;

/// How `J^+_ij` is read off a record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementPolicy<T> {
    /// Mean over every admissible sample of the record.
    Average,
    /// The sample nearest to this time since the start of the run.
    At(T),
}

/// `J^+_ij = [x(t) - a0 (1 - cos w t) / (n w)] / (a0 sin w t)`, with
/// `t` the time since the probe was switched on.
pub fn estimate_pseudo_inverse_entry<T: Scalar>(
    record: &ResponseRecord<T>,
    n_used: T,
    policy: MeasurementPolicy<T>,
) -> Result<T, InferenceError> {
    let (a0, w, t0) = (record.probe.amplitude, record.probe.frequency, record.probe.start_time);
    let min_sine = T::lit(MIN_ABS_SINE);
    let entry = |t: T, x: T| {
        let (s, c) = (w * (t - t0)).sin_cos();
        (s.abs() >= min_sine).then(|| (x - a0 * (T::one() - c) / (n_used * w)) / (a0 * s))
    };
    let none = || InferenceError::NoAdmissibleSample { min_sine: MIN_ABS_SINE };
    match policy {
        MeasurementPolicy::Average => {
            let (sum, count) = record
                .times
                .iter()
                .zip(&record.values)
                .filter_map(|(&t, &x)| entry(t, x))
                .fold((T::zero(), 0usize), |(s, k), v| (s + v, k + 1));
            if count == 0 {
                return Err(none());
            }
            Ok(sum / T::count(count))
        }
        MeasurementPolicy::At(t_meas) => {
            let k = record
                .times
                .iter()
                .enumerate()
                .min_by(|a, b| (*a.1 - t_meas).abs().partial_cmp(&(*b.1 - t_meas).abs()).unwrap())
                .map(|(k, _)| k)
                .ok_or_else(none)?;
            entry(record.times[k], record.values[k]).ok_or_else(none)
        }
    }
}

/// Reconstructed Jacobian with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianEstimate<T> {
    /// Symmetrized pseudo-inverse estimate that went into the reconstruction.
    pub j_pinv_hat: Array2<T>,
    pub j_hat: Array2<T>,
    pub n_used: T,
    /// `|<u, 1/sqrt(n)>|` of the mode treated as constant.
    pub constant_mode_overlap: T,
    pub rel_frobenius_error: Option<T>,
}

/// Symmetrizes `j_pinv_hat`, zeroes the mode closest to the constant vector
/// and inverts every other eigenvalue with `|lambda| > zero_tol * max|lambda|`.
///
/// A shift `c 1 1^T` of the input only moves the constant mode's eigenvalue,
/// so it leaves the result unchanged.
pub fn reconstruct_jacobian<T: Scalar>(j_pinv_hat: ArrayView2<'_, T>, zero_tol: T) -> Result<JacobianEstimate<T>, InferenceError> {
    let (r, c) = j_pinv_hat.dim();
    if r != c {
        return Err(InferenceError::DimensionMismatch(r, c));
    }
    let sym = symmetrize(j_pinv_hat);
    let tol = T::lit(linalg::DEFAULT_EIGEN_TOL).max(T::epsilon() * T::lit(10.0));
    let n = r;
    let (_, overlap) = constant_mode(&linalg::symmetric_eigen(sym.view(), tol)?);
    if !(overlap >= T::lit(CONSTANT_MODE_MIN_OVERLAP)) {
        return Err(InferenceError::ConstantModeLost { overlap: overlap.as_f64(), min: CONSTANT_MODE_MIN_OVERLAP });
    }
    // Removing the mean is one more uniform shift; it keeps a large unknown
    // offset from swamping the other modes in finite precision.
    let mean = sym.sum() / T::count(n * n);
    let centered = sym.mapv(|v| v - mean);
    let d = linalg::symmetric_eigen(centered.view(), tol)?;
    let (constant, _) = constant_mode(&d);
    let cutoff = zero_tol
        * (0..n)
            .filter(|&a| a != constant)
            .fold(T::zero(), |m, a| m.max(d.values[a].abs()));
    let mut j_hat = Array2::zeros((n, n));
    for a in (0..n).filter(|&a| a != constant) {
        let lam = d.values[a];
        if lam.abs() <= cutoff {
            continue;
        }
        let u = d.vector(a);
        let inv = T::one() / lam;
        for i in 0..n {
            let ui = u[i] * inv;
            for j in 0..n {
                j_hat[[i, j]] = j_hat[[i, j]] + ui * u[j];
            }
        }
    }
    Ok(JacobianEstimate { j_pinv_hat: sym, j_hat, n_used: T::zero(), constant_mode_overlap: overlap, rel_frobenius_error: None })
}

/// Mode with the largest overlap `|<u, 1/sqrt(n)>|`, and that overlap.
fn constant_mode<T: Scalar>(d: &linalg::SpectralDecomposition<T>) -> (usize, T) {
    let inv_sqrt_n = T::one() / T::count(d.dim()).sqrt();
    (0..d.dim())
        .map(|a| (a, d.vector(a).sum().abs() * inv_sqrt_n))
        .fold((0, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// `|J_hat - J|_F / |J|_F`.
pub fn frobenius_relative_error<T: Scalar>(j_hat: ArrayView2<'_, T>, j_true: ArrayView2<'_, T>) -> Result<T, InferenceError> {
    if j_hat.dim() != j_true.dim() {
        return Err(InferenceError::DimensionMismatch(j_hat.len(), j_true.len()));
    }
    let norm = frobenius(j_true);
    if !(norm > T::zero()) {
        return Err(InferenceError::ZeroReference);
    }
    Ok(frobenius((&j_hat - &j_true).view()) / norm)
}

/// Pearson correlation between corresponding entries of two matrices.
pub fn entry_correlation<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> Result<T, InferenceError> {
    if a.dim() != b.dim() {
        return Err(InferenceError::DimensionMismatch(a.len(), b.len()));
    }
    let m = T::count(a.len());
    let (ma, mb) = (a.sum() / m, b.sum() / m);
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b.iter()) {
        let (dx, dy) = (x - ma, y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if !(saa > T::zero() && sbb > T::zero()) {
        return Err(InferenceError::ZeroReference);
    }
    Ok(sab / (saa * sbb).sqrt())
}
