//! Weighted graph Laplacians.
//!
//! Convention: `L_ij = -a_ij w_ij` off the diagonal and `L_ii = sum_j a_ij w_ij`,
//! so the linearized dynamics read `x' = -L x + xi` and `L` is positive
//! semidefinite for positive weights.

use ndarray::{Array2, ArrayView2};

use crate::graph::Graph;
use crate::linalg::{self, LinalgError, SpectralDecomposition};
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LaplacianError {
    #[error("expected {expected} edge weights, got {got}")]
    MissingWeights { expected: usize, got: usize },
    #[error("edge ({0}, {1}) has non-positive or non-finite weight {2}")]
    NonPositiveWeight(usize, usize, f64),
}

/// Dense symmetric Laplacian with zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLaplacian<T> {
    matrix: Array2<T>,
}

impl<T: Scalar> WeightedLaplacian<T> {
    /// Assembles a Laplacian from per-edge weights without sign checks.
    ///
    /// Diagonals are accumulated from the same terms as the off-diagonals so
    /// each row sums to zero up to one rounding per edge.
    pub(crate) fn from_signed_weights(g: &Graph, weights: &[T]) -> Self {
        let n = g.node_count();
        let mut m = Array2::zeros((n, n));
        for (&(i, j), &w) in g.edges().iter().zip(weights) {
            m[[i, j]] = m[[i, j]] - w;
            m[[j, i]] = m[[j, i]] - w;
            m[[i, i]] = m[[i, i]] + w;
            m[[j, j]] = m[[j, j]] + w;
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<T> {
        &self.matrix
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.matrix.view()
    }

    pub fn into_matrix(self) -> Array2<T> {
        self.matrix
    }

    /// Largest absolute row sum.
    pub fn max_row_sum(&self) -> T {
        self.matrix.rows().into_iter().map(|r| r.sum().abs()).fold(T::zero(), T::max)
    }

    /// Eigendecomposition with the default tolerance.
    pub fn spectrum(&self) -> Result<SpectralDecomposition<T>, LinalgError> {
        let tol = T::lit(linalg::DEFAULT_EIGEN_TOL).max(T::epsilon() * T::lit(10.0));
        linalg::symmetric_eigen(self.view(), tol)
    }
}

/// `L` from strictly positive weights aligned with `g.edges()`.
pub fn laplacian_from_edge_weights<T: Scalar>(g: &Graph, weights: &[T]) -> Result<WeightedLaplacian<T>, LaplacianError> {
    if weights.len() != g.edge_count() {
        return Err(LaplacianError::MissingWeights { expected: g.edge_count(), got: weights.len() });
    }
    for (&(i, j), &w) in g.edges().iter().zip(weights) {
        if !(w > T::zero()) || !w.is_finite() {
            return Err(LaplacianError::NonPositiveWeight(i, j, w.as_f64()));
        }
    }
    Ok(WeightedLaplacian::from_signed_weights(g, weights))
}

/// Combinatorial Laplacian (all weights one).
pub fn unweighted_laplacian<T: Scalar>(g: &Graph) -> WeightedLaplacian<T> {
    WeightedLaplacian::from_signed_weights(g, &vec![T::one(); g.edge_count()])
}
