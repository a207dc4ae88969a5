//! Fixed-step classical Runge–Kutta integration and probing experiments.

use ndarray::{Array2, ArrayView1};

use crate::rng::XorShift64Star;
use crate::scalar::Scalar;

use super::fixed_point::FixedPoint;
use super::system::{ProbeSignal, SystemSpec};
use super::DynamicsError;

/// States beyond `DIVERGENCE_FACTOR * max(1, |y0|_inf)` abort the run.
pub const DIVERGENCE_FACTOR: f64 = 1e8;

/// Zero-mean uniform perturbation `U(-amplitude, amplitude)` added to every
/// node after each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise<T> {
    pub amplitude: T,
    pub seed: u64,
}

/// Uniformly sampled states with the reference point used for deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    /// One row per sample, one column per node.
    pub states: Array2<T>,
    /// `y*` for probing runs; zero otherwise.
    pub reference: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.states.ncols()
    }

    pub fn state(&self, k: usize) -> ArrayView1<'_, T> {
        self.states.row(k)
    }

    pub fn last_state(&self) -> ArrayView1<'_, T> {
        self.states.row(self.len() - 1)
    }

    /// `x_j(t_k) = y_j(t_k) - y*_j` for every sample.
    pub fn deviation_series(&self, node: usize) -> Vec<T> {
        let r = self.reference[node];
        self.states.column(node).iter().map(|&y| y - r).collect()
    }

    /// Sample spacing.
    pub fn sample_step(&self) -> Option<T> {
        (self.times.len() >= 2).then(|| self.times[1] - self.times[0])
    }
}

/// Integrates with classical RK4 from `y0` at `t = 0` to `horizon`,
/// recording every `record_stride`-th step (the initial state included).
pub fn integrate<T: Scalar>(
    spec: &SystemSpec<T>,
    y0: &[T],
    probe: Option<&ProbeSignal<T>>,
    horizon: T,
    dt: T,
    record_stride: usize,
) -> Result<Trajectory<T>, DynamicsError> {
    integrate_with_noise(spec, y0, probe, horizon, dt, record_stride, None)
}

/// [`integrate`] with an optional additive per-step perturbation.
pub fn integrate_with_noise<T: Scalar>(
    spec: &SystemSpec<T>,
    y0: &[T],
    probe: Option<&ProbeSignal<T>>,
    horizon: T,
    dt: T,
    record_stride: usize,
    noise: Option<Noise<T>>,
) -> Result<Trajectory<T>, DynamicsError> {
    let n = spec.node_count();
    if y0.len() != n {
        return Err(DynamicsError::DimensionMismatch { expected: n, got: y0.len() });
    }
    if !(dt > T::zero()) || !dt.is_finite() || !(horizon >= dt) || record_stride == 0 {
        return Err(DynamicsError::InvalidStep(format!(
            "need dt > 0, horizon >= dt and stride >= 1 (dt = {dt}, horizon = {horizon}, stride = {record_stride})"
        )));
    }
    if let Some(p) = probe {
        p.validate(n)?;
    }
    let steps = (horizon / dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(usize::MAX);
    let samples = steps / record_stride + 1;
    let guard = T::lit(DIVERGENCE_FACTOR) * y0.iter().fold(T::one(), |m, y| m.max(y.abs()));
    let mut rng = noise.map(|nz| XorShift64Star::new(nz.seed));

    let mut times = Vec::with_capacity(samples);
    let mut states = Array2::zeros((samples, n));
    let mut y = y0.to_vec();
    let mut k1 = vec![T::zero(); n];
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let half = T::lit(0.5);
    let sixth = dt / T::lit(6.0);

    times.push(T::zero());
    states.row_mut(0).assign(&ArrayView1::from(&y));
    for step in 0..steps {
        let t = T::count(step) * dt;
        spec.derivative_into(&y, t, probe, &mut k1);
        for ((s, &yi), &k) in tmp.iter_mut().zip(&y).zip(&k1) {
            *s = yi + half * dt * k;
        }
        spec.derivative_into(&tmp, t + half * dt, probe, &mut k2);
        for ((s, &yi), &k) in tmp.iter_mut().zip(&y).zip(&k2) {
            *s = yi + half * dt * k;
        }
        spec.derivative_into(&tmp, t + half * dt, probe, &mut k3);
        for ((s, &yi), &k) in tmp.iter_mut().zip(&y).zip(&k3) {
            *s = yi + dt * k;
        }
        spec.derivative_into(&tmp, t + dt, probe, &mut k4);
        let two = T::lit(2.0);
        let mut peak = T::zero();
        for i in 0..n {
            y[i] = y[i] + sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
            if let (Some(r), Some(nz)) = (rng.as_mut(), noise) {
                y[i] = y[i] + nz.amplitude * T::lit(r.uniform(-1.0, 1.0));
            }
            peak = peak.max(y[i].abs());
        }
        if !(peak <= guard) {
            return Err(DynamicsError::Diverged { time: (T::count(step + 1) * dt).as_f64(), norm: peak.as_f64() });
        }
        if (step + 1) % record_stride == 0 {
            let row = (step + 1) / record_stride;
            times.push(T::count(step + 1) * dt);
            states.row_mut(row).assign(&ArrayView1::from(&y));
        }
    }
    Ok(Trajectory { times, states, reference: vec![T::zero(); n] })
}

/// Starts at `y*` in the co-rotating frame with the probe switched on at
/// `t = 0`; the returned trajectory carries `y*` as its reference so that
/// [`Trajectory::deviation_series`] yields `x_j(t)` for every node.
pub fn probe_response<T: Scalar>(
    spec: &SystemSpec<T>,
    fp: &FixedPoint<T>,
    probe: &ProbeSignal<T>,
    horizon: T,
    dt: T,
    record_stride: usize,
) -> Result<Trajectory<T>, DynamicsError> {
    probe_response_with_noise(spec, fp, probe, horizon, dt, record_stride, None)
}

pub fn probe_response_with_noise<T: Scalar>(
    spec: &SystemSpec<T>,
    fp: &FixedPoint<T>,
    probe: &ProbeSignal<T>,
    horizon: T,
    dt: T,
    record_stride: usize,
    noise: Option<Noise<T>>,
) -> Result<Trajectory<T>, DynamicsError> {
    let frame = spec.co_rotating();
    let mut traj = integrate_with_noise(&frame, &fp.y_star, Some(probe), horizon, dt, record_stride, noise)?;
    traj.reference = fp.y_star.clone();
    Ok(traj)
}

/// `max_{j,t} |x(a0) - 2 x(a0/2)| / max_{j,t} |x(a0)|`; zero for exactly
/// linear responses.
pub fn linearity_check<T: Scalar>(
    spec: &SystemSpec<T>,
    fp: &FixedPoint<T>,
    probe: &ProbeSignal<T>,
    horizon: T,
    dt: T,
) -> Result<T, DynamicsError> {
    let full = probe_response(spec, fp, probe, horizon, dt, 1)?;
    let half = probe_response(spec, fp, &probe.with_amplitude(probe.amplitude * T::lit(0.5)), horizon, dt, 1)?;
    let two = T::lit(2.0);
    let mut gap = T::zero();
    let mut scale = T::zero();
    for k in 0..full.len() {
        for j in 0..full.node_count() {
            let xf = full.states[[k, j]] - full.reference[j];
            let xh = half.states[[k, j]] - half.reference[j];
            gap = gap.max((xf - two * xh).abs());
            scale = scale.max(xf.abs());
        }
    }
    Ok(if scale > T::zero() { gap / scale } else { T::zero() })
}
