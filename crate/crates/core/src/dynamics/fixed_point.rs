//! Phase-locked operating points and the Jacobian there.

use ndarray::{s, Array2};

use crate::laplacian::WeightedLaplacian;
use crate::linalg::{self, SpectralDecomposition};
use crate::scalar::Scalar;

use super::integrate::integrate;
use super::system::SystemSpec;
use super::DynamicsError;

/// Eigenvalues below `-STABILITY_TOL * max(1, lambda_n)` mark an unstable point.
pub const STABILITY_TOL: f64 = 1e-9;

/// Stable fixed point of the co-rotating dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<T> {
    pub y_star: Vec<T>,
    /// `|y'|_inf` at `y_star` in the co-rotating frame.
    pub residual: T,
    pub jacobian: WeightedLaplacian<T>,
    pub spectrum: SpectralDecomposition<T>,
}

impl<T: Scalar> FixedPoint<T> {
    /// Fiedler value of the Jacobian.
    pub fn lambda2(&self) -> T {
        self.spectrum.values[1]
    }

    pub fn lambda_max(&self) -> T {
        self.spectrum.values[self.spectrum.dim() - 1]
    }
}

/// Laplacian with edge weights `f'_ij(y_i - y_j)`; `x' = -L x` is the
/// linearization of the dynamics around `y`.
///
/// Edges whose slope is not positive (repulsive linearization) are logged;
/// the stability check in [`find_fixed_point`] rejects such points when they
/// destabilize the spectrum.
pub fn jacobian_at<T: Scalar>(spec: &SystemSpec<T>, y: &[T]) -> WeightedLaplacian<T> {
    let weights: Vec<T> = spec
        .graph()
        .edges()
        .iter()
        .zip(spec.couplings())
        .map(|(&(i, j), c)| {
            let w = c.slope(y[i] - y[j]);
            if !(w > T::zero()) {
                log::warn!("edge ({i}, {j}) has non-positive effective weight {w}");
            }
            w
        })
        .collect();
    WeightedLaplacian::from_signed_weights(spec.graph(), &weights)
}

/// Edges with non-positive slope at `y`.
pub fn repulsive_edges<T: Scalar>(spec: &SystemSpec<T>, y: &[T]) -> Vec<(usize, usize)> {
    spec.graph()
        .edges()
        .iter()
        .zip(spec.couplings())
        .filter(|(&(i, j), c)| !(c.slope(y[i] - y[j]) > T::zero()))
        .map(|(&e, _)| e)
        .collect()
}

fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Newton iteration on the gauge-fixed co-rotating system.
///
/// `y_0` stays pinned to `guess[0]`; the remaining `n - 1` balance equations
/// are solved with the grounded Jacobian. Steps are backtracked until the
/// residual decreases; when that fails the state is relaxed by integrating
/// the dynamics for a while before Newton resumes. Each Newton step and each
/// relaxation episode counts towards `max_iter`.
pub fn find_fixed_point<T: Scalar>(
    spec: &SystemSpec<T>,
    guess: &[T],
    tol: T,
    max_iter: usize,
) -> Result<FixedPoint<T>, DynamicsError> {
    let n = spec.node_count();
    if guess.len() != n {
        return Err(DynamicsError::DimensionMismatch { expected: n, got: guess.len() });
    }
    let frame = spec.co_rotating();
    let pin = guess[0];
    let mut y = guess.to_vec();
    let mut rate = frame.derivative(&y, T::zero(), None);
    let mut residual = inf_norm(&rate);
    let relax_dt = T::lit(0.1) / frame.spectral_bound().max(T::min_positive_value());

    let mut iter = 0;
    while residual > tol {
        if iter == max_iter {
            return Err(DynamicsError::NoConvergence { iterations: iter, residual: residual.as_f64() });
        }
        iter += 1;
        let step = newton_step(&frame, &y, &rate);
        let mut accepted = false;
        if let Some(step) = step {
            let mut alpha = T::one();
            for _ in 0..12 {
                let trial: Vec<T> = y.iter().zip(&step).map(|(&a, &d)| a + alpha * d).collect();
                let trial_rate = frame.derivative(&trial, T::zero(), None);
                let trial_res = inf_norm(&trial_rate);
                if trial_res < residual || trial_res <= tol {
                    y = trial;
                    rate = trial_rate;
                    residual = trial_res;
                    accepted = true;
                    break;
                }
                alpha = alpha * T::lit(0.5);
            }
        }
        if !accepted {
            log::debug!("newton stalled at residual {residual}; relaxing");
            let traj = integrate(&frame, &y, None, relax_dt * T::count(2000), relax_dt, 2000)?;
            y = traj.last_state().to_vec();
            let shift = pin - y[0];
            y.iter_mut().for_each(|v| *v = *v + shift);
            rate = frame.derivative(&y, T::zero(), None);
            residual = inf_norm(&rate);
        }
    }

    let jacobian = jacobian_at(&frame, &y);
    let spectrum = jacobian.spectrum()?;
    let scale = spectrum.spectral_radius().max(T::one());
    let threshold = T::lit(STABILITY_TOL) * scale;
    if let Some(&bad) = spectrum.values.iter().find(|&&v| v < -threshold) {
        return Err(DynamicsError::Unstable { eigenvalue: bad.as_f64() });
    }
    if n > 1 && !(spectrum.values[1] > threshold) {
        return Err(DynamicsError::Unstable { eigenvalue: spectrum.values[1].as_f64() });
    }
    Ok(FixedPoint { y_star: y, residual, jacobian, spectrum })
}

/// Solves `L_red delta = rate_red` on nodes `1..n` with `delta_0 = 0`.
fn newton_step<T: Scalar>(frame: &SystemSpec<T>, y: &[T], rate: &[T]) -> Option<Vec<T>> {
    let n = y.len();
    let l = jacobian_at(frame, y);
    let reduced: Array2<T> = l.matrix().slice(s![1.., 1..]).to_owned();
    let delta = linalg::solve(reduced.view(), &rate[1..]).ok()?;
    let mut step = vec![T::zero(); n];
    step[1..].copy_from_slice(delta.as_slice()?);
    step.iter().all(|v| v.is_finite()).then_some(step)
}
