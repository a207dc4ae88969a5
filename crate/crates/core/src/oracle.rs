//! Closed-form linear response to a sinusoidal probe, plus an independent
//! step-by-step evolution of the linearized system.
//!
//! For `x' = -L x + e_i a0 sin(w t)` started at `x(0) = 0`, mode `alpha` of
//! `L` evolves as
//!
//! ```text
//! c_a(t) = u_{a,i} a0 [l_a sin(w t) + w e^{-l_a t} - w cos(w t)] / (l_a^2 + w^2)
//! ```
//!
//! and `x_j(t) = sum_a c_a(t) u_{a,j}`. The zero mode integrates the drive
//! directly: `c_1(t) = u_{1,i} a0 (1 - cos(w t)) / w`.

use ndarray::{Array1, Array2, ArrayView2};

use crate::dynamics::{ProbeSignal, Trajectory};
use crate::laplacian::WeightedLaplacian;
use crate::linalg::{self, LinalgError, SpectralDecomposition};
use crate::scalar::Scalar;

/// Mode coefficient `c_alpha(t)` for eigenvalue `lambda` and projection
/// `proj = u_{alpha,i}` of the probed node onto the mode.
pub fn modal_coefficient<T: Scalar>(lambda: T, proj: T, probe: &ProbeSignal<T>, t: T) -> T {
    let tau = t - probe.start_time;
    if !(tau > T::zero()) {
        return T::zero();
    }
    let (a0, w) = (probe.amplitude, probe.frequency);
    let (sin, cos) = (w * tau).sin_cos();
    if lambda == T::zero() {
        return proj * a0 * (T::one() - cos) / w;
    }
    proj * a0 * (lambda * sin + w * (-lambda * tau).exp() - w * cos) / (lambda * lambda + w * w)
}

/// Modal expansion of the response to one probe.
#[derive(Debug, Clone)]
pub struct ModalResponse<'a, T> {
    pub decomposition: &'a SpectralDecomposition<T>,
    pub probe: ProbeSignal<T>,
    zero_tol: T,
}

impl<'a, T: Scalar> ModalResponse<'a, T> {
    /// Eigenvalues with `|lambda| <= 1e-9 max|lambda|` are treated as exact zero modes.
    pub fn new(decomposition: &'a SpectralDecomposition<T>, probe: ProbeSignal<T>) -> Self {
        let zero_tol = linalg::default_zero_tol(decomposition);
        Self { decomposition, probe, zero_tol }
    }

    fn eigenvalue(&self, alpha: usize) -> T {
        let l = self.decomposition.values[alpha];
        if l.abs() <= self.zero_tol {
            T::zero()
        } else {
            l
        }
    }

    /// `c_alpha(t)` for every mode.
    pub fn coefficients(&self, t: T) -> Array1<T> {
        let i = self.probe.node;
        Array1::from_shape_fn(self.decomposition.dim(), |a| {
            modal_coefficient(self.eigenvalue(a), self.decomposition.vectors[[i, a]], &self.probe, t)
        })
    }

    /// `x(t)` at every node.
    pub fn state(&self, t: T) -> Array1<T> {
        self.decomposition.vectors.dot(&self.coefficients(t))
    }

    /// Responses at the given times, one row per time.
    pub fn trajectory(&self, times: &[T]) -> Array2<T> {
        let n = self.decomposition.dim();
        let mut out = Array2::zeros((times.len(), n));
        for (k, &t) in times.iter().enumerate() {
            out.row_mut(k).assign(&self.state(t));
        }
        out
    }
}

/// `x_j(t)` for a probe at `probe.node`, summed mode by mode.
pub fn closed_form_response<T: Scalar>(decomp: &SpectralDecomposition<T>, j: usize, probe: &ProbeSignal<T>, t: T) -> T {
    let modal = ModalResponse::new(decomp, *probe);
    let i = probe.node;
    let tau = t - probe.start_time;
    if !(tau > T::zero()) {
        return T::zero();
    }
    let (a0, w) = (probe.amplitude, probe.frequency);
    let (sin, cos) = (w * tau).sin_cos();
    (0..decomp.dim())
        .map(|a| {
            let lam = modal.eigenvalue(a);
            let weight = decomp.vectors[[i, a]] * decomp.vectors[[j, a]] * a0 / (lam * lam + w * w);
            weight * (lam * sin + w * (-lam * tau).exp() - w * cos)
        })
        .sum()
}

/// Long-time, low-frequency form
/// `J^+_ij a0 sin(w t) + a0 (1 - cos(w t)) / (n w)`.
pub fn asymptotic_response<T: Scalar>(l_pinv: ArrayView2<'_, T>, n: usize, i: usize, j: usize, probe: &ProbeSignal<T>, t: T) -> T {
    let tau = t - probe.start_time;
    let (a0, w) = (probe.amplitude, probe.frequency);
    let (sin, cos) = (w * tau).sin_cos();
    l_pinv[[i, j]] * a0 * sin + a0 * (T::one() - cos) / (T::count(n) * w)
}

/// Evolves `x' = -L x + xi` in the eigenbasis of `L`: each step applies the
/// exact decay `e^{-lambda dt}` and accumulates the forcing integral with the
/// trapezoidal rule. Records every `record_stride`-th step from `t = 0`.
///
/// Intended for `dt * lambda_n <= 0.1`.
pub fn brute_force_response<T: Scalar>(
    l: &WeightedLaplacian<T>,
    probe: &ProbeSignal<T>,
    horizon: T,
    dt: T,
    record_stride: usize,
) -> Result<Trajectory<T>, LinalgError> {
    let d = l.spectrum()?;
    Ok(brute_force_from_spectrum(&d, probe, horizon, dt, record_stride))
}

pub fn brute_force_from_spectrum<T: Scalar>(
    d: &SpectralDecomposition<T>,
    probe: &ProbeSignal<T>,
    horizon: T,
    dt: T,
    record_stride: usize,
) -> Trajectory<T> {
    let n = d.dim();
    let stride = record_stride.max(1);
    let steps = (horizon / dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(0);
    let zero_tol = linalg::default_zero_tol(d);
    let decay: Vec<T> = d
        .values
        .iter()
        .map(|&l| if l.abs() <= zero_tol { T::one() } else { (-l * dt).exp() })
        .collect();
    let proj: Vec<T> = (0..n).map(|a| d.vectors[[probe.node, a]]).collect();
    let half = dt * T::lit(0.5);

    let mut c = Array1::<T>::zeros(n);
    let mut times = vec![T::zero()];
    let mut rows = vec![Array1::<T>::zeros(n)];
    let mut prev = probe.value(T::zero());
    for step in 0..steps {
        let t1 = T::count(step + 1) * dt;
        let next = probe.value(t1);
        for a in 0..n {
            c[a] = decay[a] * (c[a] + half * proj[a] * prev) + half * proj[a] * next;
        }
        prev = next;
        if (step + 1) % stride == 0 {
            times.push(t1);
            rows.push(d.vectors.dot(&c));
        }
    }
    let mut states = Array2::zeros((rows.len(), n));
    for (k, r) in rows.iter().enumerate() {
        states.row_mut(k).assign(r);
    }
    Trajectory { times, states, reference: vec![T::zero(); n] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{erdos_renyi, Graph};
    use crate::laplacian::{laplacian_from_edge_weights, unweighted_laplacian};
    use crate::rng::XorShift64Star;

    /// Adaptive Simpson quadrature; test-only oracle.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, whole: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (l, r) = (simpson(f, a, m), simpson(f, m, b));
            if depth == 0 || (l + r - whole).abs() <= 15.0 * eps {
                return l + r + (l + r - whole) / 15.0;
            }
            rec(f, a, m, eps / 2.0, l, depth - 1) + rec(f, m, b, eps / 2.0, r, depth - 1)
        }
        rec(f, a, b, eps, simpson(f, a, b), 40)
    }

    #[test]
    fn coefficient_vanishes_at_start() {
        let p = ProbeSignal::new(0, 0.7, 1.3);
        for lam in [0.0, 0.1, 5.0] {
            assert_eq!(modal_coefficient(lam, 0.4, &p, 0.0), 0.0);
        }
    }

    #[test]
    fn zero_mode_integrates_the_drive() {
        let p = ProbeSignal::new(0, 0.7, 1.3);
        for t in [0.3, 2.0, 17.0] {
            let want = 0.4 * 0.7 * (1.0 - (1.3f64 * t).cos()) / 1.3;
            assert!((modal_coefficient(0.0, 0.4, &p, t) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn coefficient_matches_quadrature() {
        let mut r = XorShift64Star::new(17);
        for _ in 0..20 {
            let lam = r.uniform(0.0, 5.0);
            let w = r.uniform(0.05, 4.0);
            let t = r.uniform(0.1, 20.0);
            let proj = r.uniform(-1.0, 1.0);
            let p = ProbeSignal::new(0, 1.0, w);
            let integrand = |s: f64| (-lam * (t - s)).exp() * proj * (w * s).sin();
            let want = adaptive_simpson(&integrand, 0.0, t, 1e-13);
            let got = modal_coefficient(lam, proj, &p, t);
            assert!((got - want).abs() <= 1e-10, "lam {lam} w {w} t {t}: {got} vs {want}");
        }
    }

    #[test]
    fn path_two_by_hand() {
        // L = [[1,-1],[-1,1]], modes (1,1)/sqrt2 with 0 and (1,-1)/sqrt2 with 2.
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let d = unweighted_laplacian::<f64>(&g).spectrum().unwrap();
        let p = ProbeSignal::new(0, 0.5, 0.8);
        for t in [0.0, 0.4, 3.0, 11.0] {
            let zero = 0.5 * 0.5 * (1.0 - (0.8f64 * t).cos()) / 0.8;
            let fast = 0.5 * 0.5 * (2.0 * (0.8f64 * t).sin() + 0.8 * (-2.0 * t).exp() - 0.8 * (0.8f64 * t).cos())
                / (4.0 + 0.64);
            assert!((closed_form_response(&d, 0, &p, t) - (zero + fast)).abs() < 1e-14);
            assert!((closed_form_response(&d, 1, &p, t) - (zero - fast)).abs() < 1e-14);
        }
    }

    #[test]
    fn modal_recombination_matches_pairwise_sum() {
        let g = erdos_renyi(10, 18, 4).unwrap();
        let d = unweighted_laplacian::<f64>(&g).spectrum().unwrap();
        let p = ProbeSignal::new(3, 0.01, 0.2);
        let modal = ModalResponse::new(&d, p);
        for t in [0.5, 7.0, 40.0] {
            let x = modal.state(t);
            for j in 0..10 {
                assert!((x[j] - closed_form_response(&d, j, &p, t)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn asymptotic_special_times() {
        let g = erdos_renyi(8, 12, 1).unwrap();
        let l = unweighted_laplacian::<f64>(&g);
        let d = l.spectrum().unwrap();
        let pinv = linalg::pseudo_inverse(&d, linalg::default_zero_tol(&d));
        let p = ProbeSignal::new(2, 0.3, 0.05);
        for k in 0..4 {
            let t = std::f64::consts::TAU * k as f64 / 0.05;
            assert!(asymptotic_response(pinv.view(), 8, 2, 5, &p, t).abs() < 1e-12);
        }
        let t = std::f64::consts::FRAC_PI_2 / 0.05;
        let want = pinv[[2, 5]] * 0.3 + 0.3 / (8.0 * 0.05);
        assert!((asymptotic_response(pinv.view(), 8, 2, 5, &p, t) - want).abs() < 1e-12);
    }

    #[test]
    fn brute_force_zero_forcing() {
        let g = erdos_renyi(6, 8, 2).unwrap();
        let l = unweighted_laplacian::<f64>(&g);
        let p = ProbeSignal::new(0, 0.0, 0.3);
        let traj = brute_force_response(&l, &p, 10.0, 0.01, 10).unwrap();
        assert!(traj.states.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn brute_force_matches_closed_form() {
        let g = erdos_renyi(10, 16, 9).unwrap();
        let mut r = XorShift64Star::new(3);
        let w: Vec<f64> = (0..16).map(|_| r.uniform(0.5, 1.5)).collect();
        let l = laplacian_from_edge_weights(&g, &w).unwrap();
        let d = l.spectrum().unwrap();
        let p = ProbeSignal::new(4, 1e-3, 0.5 * d.values[1]);
        let dt = 0.1 / d.values[9] / 20.0;
        let traj = brute_force_response(&l, &p, 60.0, dt, 200).unwrap();
        let mut worst = 0.0f64;
        for (k, &t) in traj.times.iter().enumerate() {
            for j in 0..10 {
                worst = worst.max((traj.states[[k, j]] - closed_form_response(&d, j, &p, t)).abs());
            }
        }
        assert!(worst <= 1e-9, "{worst:e}");
    }
}
