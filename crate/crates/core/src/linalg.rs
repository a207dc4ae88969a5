//! Dense symmetric eigendecomposition (cyclic Jacobi) and Moore–Penrose
//! pseudo-inverses built on it.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::scalar::Scalar;

/// Default off-diagonal tolerance for [`symmetric_eigen`] in double precision.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-12;
/// Sweep budget for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Tolerance on `|M_ij - M_ji|` accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric: |M[{i},{j}] - M[{j},{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("matrix is singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },
}

/// Eigenvalues in ascending order with orthonormal eigenvectors stored as
/// the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition<T> {
    pub values: Array1<T>,
    pub vectors: Array2<T>,
}

impl<T: Scalar> SpectralDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvector `u_alpha` as a column view.
    pub fn vector(&self, alpha: usize) -> ndarray::ArrayView1<'_, T> {
        self.vectors.column(alpha)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `U diag(values) U^T`.
    pub fn reconstruct(&self) -> Array2<T> {
        self.recombine(|lam| lam)
    }

    /// `U diag(g(values)) U^T` for a spectral function `g`.
    pub fn recombine(&self, g: impl Fn(T) -> T) -> Array2<T> {
        let mut scaled = self.vectors.clone();
        for (mut col, &lam) in scaled.axis_iter_mut(Axis(1)).zip(self.values.iter()) {
            let s = g(lam);
            col.mapv_inplace(|x| x * s);
        }
        scaled.dot(&self.vectors.t())
    }
}

pub(crate) fn check_symmetric<T: Scalar>(m: ArrayView2<'_, T>, tol: T) -> Result<(), LinalgError> {
    let (r, c) = m.dim();
    if r != c {
        return Err(LinalgError::NotSquare(r, c));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    for i in 0..r {
        for j in i + 1..r {
            let gap = (m[[i, j]] - m[[j, i]]).abs();
            if gap > tol {
                return Err(LinalgError::NotSymmetric { i, j, gap: gap.as_f64() });
            }
        }
    }
    Ok(())
}

fn off_diagonal_norm<T: Scalar>(a: &Array2<T>) -> T {
    let n = a.nrows();
    let mut s = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            s = s + a[[i, j]] * a[[i, j]];
        }
    }
    (s + s).sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps annihilate every off-diagonal pair in row order until the
/// off-diagonal Frobenius norm falls below `tol * ||M||_F` (or below the
/// smallest positive normal for a zero matrix). Eigenpairs are returned in
/// ascending order; each eigenvector is signed so that its entry of largest
/// magnitude is positive.
pub fn symmetric_eigen<T: Scalar>(m: ArrayView2<'_, T>, tol: T) -> Result<SpectralDecomposition<T>, LinalgError> {
    if !(tol > T::zero()) {
        return Err(LinalgError::BadTolerance);
    }
    let scale = m.iter().fold(T::zero(), |s, &x| s.max(x.abs())).max(T::one());
    check_symmetric(m, T::lit(SYMMETRY_TOL) * scale)?;
    let n = m.nrows();
    // Symmetrize exactly so rotations act on a truly symmetric matrix.
    let mut a = Array2::from_shape_fn((n, n), |(i, j)| (m[[i, j]] + m[[j, i]]) * T::lit(0.5));
    let mut v = Array2::<T>::eye(n);
    let frob = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    let target = (tol * frob).max(T::min_positive_value());

    let mut off = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while off > target {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps, off_norm: off.as_f64() });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[[x, x]].partial_cmp(&a[[y, y]]).expect("finite eigenvalues"));
    let values = Array1::from_iter(order.iter().map(|&k| a[[k, k]]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let col = v.column(src);
        let pivot = col
            .iter()
            .fold((T::zero(), T::zero()), |(best, val), &x| if x.abs() > best { (x.abs(), x) } else { (best, val) })
            .1;
        let sign = if pivot < T::zero() { -T::one() } else { T::one() };
        vectors.column_mut(dst).assign(&col.mapv(|x| x * sign));
    }
    Ok(SpectralDecomposition { values, vectors })
}

/// One Jacobi rotation zeroing `a[p][q]`, accumulated into `v`.
#[inline]
fn rotate<T: Scalar>(a: &mut Array2<T>, v: &mut Array2<T>, p: usize, q: usize) {
    let apq = a[[p, q]];
    if apq == T::zero() {
        return;
    }
    let app = a[[p, p]];
    let aqq = a[[q, q]];
    let theta = (aqq - app) / (apq + apq);
    let t = {
        let mag = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
        if theta < T::zero() { -mag } else { mag }
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let n = a.nrows();
    for k in 0..n {
        let akp = a[[k, p]];
        let akq = a[[k, q]];
        a[[k, p]] = c * akp - s * akq;
        a[[k, q]] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[[p, k]];
        let aqk = a[[q, k]];
        a[[p, k]] = c * apk - s * aqk;
        a[[q, k]] = s * apk + c * aqk;
    }
    a[[p, q]] = T::zero();
    a[[q, p]] = T::zero();
    for k in 0..n {
        let vkp = v[[k, p]];
        let vkq = v[[k, q]];
        v[[k, p]] = c * vkp - s * vkq;
        v[[k, q]] = s * vkp + c * vkq;
    }
}

/// Default cutoff below which eigenvalues count as zero: `1e-9 * max|lambda|`.
pub fn default_zero_tol<T: Scalar>(d: &SpectralDecomposition<T>) -> T {
    T::lit(1e-9) * d.spectral_radius()
}

/// Moore–Penrose pseudo-inverse `sum_{|lambda| > zero_tol} u u^T / lambda`.
pub fn pseudo_inverse<T: Scalar>(d: &SpectralDecomposition<T>, zero_tol: T) -> Array2<T> {
    d.recombine(|lam| if lam.abs() > zero_tol { T::one() / lam } else { T::zero() })
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<T: Scalar>(a: ArrayView2<'_, T>, b: &[T]) -> Result<Array1<T>, LinalgError> {
    let (r, c) = a.dim();
    if r != c {
        return Err(LinalgError::NotSquare(r, c));
    }
    if b.len() != r {
        return Err(LinalgError::DimensionMismatch(r, b.len()));
    }
    let n = r;
    let mut m = a.to_owned();
    let mut x = Array1::from(b.to_vec());
    let scale = m.iter().fold(T::zero(), |s, v| s.max(v.abs()));
    for col in 0..n {
        let (piv, best) = (col..n)
            .map(|k| (k, m[[k, col]].abs()))
            .fold((col, T::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if !(best > scale * T::epsilon() * T::count(n)) {
            return Err(LinalgError::Singular { column: col, pivot: best.as_f64() });
        }
        if piv != col {
            for k in 0..n {
                m.swap([col, k], [piv, k]);
            }
            x.swap(col, piv);
        }
        let d = m[[col, col]];
        for row in col + 1..n {
            let f = m[[row, col]] / d;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                m[[row, k]] = m[[row, k]] - f * m[[col, k]];
            }
            x[row] = x[row] - f * x[col];
        }
    }
    for row in (0..n).rev() {
        let mut s = x[row];
        for k in row + 1..n {
            s = s - m[[row, k]] * x[k];
        }
        x[row] = s / m[[row, row]];
    }
    Ok(x)
}

/// Frobenius norm of a matrix.
pub fn frobenius<T: Scalar>(m: ArrayView2<'_, T>) -> T {
    m.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// `(M + M^T) / 2`.
pub fn symmetrize<T: Scalar>(m: ArrayView2<'_, T>) -> Array2<T> {
    let half = T::lit(0.5);
    Array2::from_shape_fn(m.dim(), |(i, j)| (m[[i, j]] + m[[j, i]]) * half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    use crate::rng::XorShift64Star;

    fn random_symmetric(n: usize, seed: u64) -> Array2<f64> {
        let mut r = XorShift64Star::new(seed);
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let x = r.uniform(-1.0, 1.0);
                m[[i, j]] = x;
                m[[j, i]] = x;
            }
        }
        m
    }

    fn check_invariants(m: &Array2<f64>, d: &SpectralDecomposition<f64>) {
        let n = m.nrows();
        let gram = d.vectors.t().dot(&d.vectors);
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - e).abs() <= 1e-10);
            }
        }
        for a in 0..n {
            let u = d.vector(a);
            let r = m.dot(&u) - &u.mapv(|x| x * d.values[a]);
            let res = r.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            assert!(res <= 1e-9 * d.values[a].abs().max(1.0), "residual {res}");
        }
        for w in d.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let err = frobenius((d.reconstruct() - m).view());
        assert!(err <= 1e-8 * frobenius(m.view()).max(1e-300));
    }

    /// Eigenvalues of a 3x3 symmetric matrix as roots of det(M - x I),
    /// isolated by a sign scan and refined by bisection.
    fn cubic_roots_by_bisection(m: &Array2<f64>) -> Vec<f64> {
        let det = |x: f64| {
            let a = |i: usize, j: usize| m[[i, j]] - if i == j { x } else { 0.0 };
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        };
        let bound = m.iter().map(|x| x.abs()).sum::<f64>() + 1.0;
        let steps = 200_000;
        let mut roots = Vec::new();
        let mut prev_x = -bound;
        let mut prev = det(prev_x);
        for k in 1..=steps {
            let x = -bound + 2.0 * bound * k as f64 / steps as f64;
            let cur = det(x);
            if prev == 0.0 {
                roots.push(prev_x);
            } else if prev.signum() != cur.signum() {
                let (mut lo, mut hi) = (prev_x, x);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if det(mid).signum() == det(lo).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_x = x;
            prev = cur;
        }
        roots
    }

    #[test]
    fn path_two_laplacian() {
        let m = array![[1.0, -1.0], [-1.0, 1.0]];
        let d = symmetric_eigen(m.view(), 1e-12).unwrap();
        assert_abs_diff_eq!(d.values[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.values[1], 2.0, epsilon = 1e-14);
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(d.vectors[[0, 0]], h, epsilon = 1e-14);
        assert_abs_diff_eq!(d.vectors[[1, 0]], h, epsilon = 1e-14);
        check_invariants(&m, &d);
    }

    #[test]
    fn diagonal_input() {
        let m = array![[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        let d = symmetric_eigen(m.view(), 1e-12).unwrap();
        assert_eq!(d.values.to_vec(), vec![1.0, 2.0, 3.0]);
        assert_eq!(d.vectors, array![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
    }

    #[test]
    fn random_3x3_matches_characteristic_polynomial() {
        for seed in 0..10 {
            let m = random_symmetric(3, seed);
            let d = symmetric_eigen(m.view(), 1e-12).unwrap();
            let roots = cubic_roots_by_bisection(&m);
            assert_eq!(roots.len(), 3, "seed {seed}");
            for (got, want) in d.values.iter().zip(&roots) {
                assert!((got - want).abs() <= 1e-8, "seed {seed}: {got} vs {want}");
            }
            check_invariants(&m, &d);
        }
    }

    #[test]
    fn larger_random_matrices() {
        for seed in 0..5 {
            let m = random_symmetric(40, 100 + seed);
            let d = symmetric_eigen(m.view(), 1e-12).unwrap();
            check_invariants(&m, &d);
        }
    }

    #[test]
    fn single_precision_works() {
        let m = random_symmetric(8, 3).mapv(|x| x as f32);
        let d = symmetric_eigen(m.view(), 1e-6f32).unwrap();
        let err = frobenius((d.reconstruct() - &m).view());
        assert!(err <= 1e-5 * frobenius(m.view()));
    }

    #[test]
    fn rejects_bad_input() {
        let m = array![[1.0, 2.0], [0.0, 1.0]];
        assert!(matches!(symmetric_eigen(m.view(), 1e-12), Err(LinalgError::NotSymmetric { .. })));
        let m = Array2::<f64>::zeros((2, 3));
        assert_eq!(symmetric_eigen(m.view(), 1e-12), Err(LinalgError::NotSquare(2, 3)));
        let m = array![[f64::NAN]];
        assert_eq!(symmetric_eigen(m.view(), 1e-12), Err(LinalgError::NonFinite));
        assert_eq!(symmetric_eigen(Array2::<f64>::eye(2).view(), 0.0), Err(LinalgError::BadTolerance));
    }

    #[test]
    fn solve_small_systems() {
        let a = array![[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]];
        let want = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|k| a[[i, k]] * want[k]).sum()).collect();
        let x = solve(a.view(), &b).unwrap();
        for (g, w) in x.iter().zip(want) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-14);
        }
        let sing = array![[1.0, 2.0], [2.0, 4.0]];
        assert!(matches!(solve(sing.view(), &[1.0, 1.0]), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn pseudo_inverse_of_path_two() {
        let m = array![[1.0, -1.0], [-1.0, 1.0]];
        let d = symmetric_eigen(m.view(), 1e-12).unwrap();
        let p = pseudo_inverse(&d, default_zero_tol(&d));
        let want = array![[0.25, -0.25], [-0.25, 0.25]];
        for (a, b) in p.iter().zip(want.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn pseudo_inverse_of_zero_matrix() {
        let m = Array2::<f64>::zeros((3, 3));
        let d = symmetric_eigen(m.view(), 1e-12).unwrap();
        let p = pseudo_inverse(&d, default_zero_tol(&d));
        assert!(p.iter().all(|&x| x == 0.0));
    }
}
