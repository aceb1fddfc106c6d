//! Sparse storage, iterative and dense kernels used by the solvers.

mod cg;
mod dense;
mod power;
mod sparse;

pub use cg::{cg_solve, CgOptions, LinearSolveReport, SolveStatus};
pub use dense::{
    dense_generalized_symmetric_eig, numerical_rank, symmetric_indefinite_solve, BlockCholesky,
    GeneralizedEigen, IndefiniteSolve,
};
pub use power::{power_method_spectral_radius, PowerReport};
pub use sparse::{SparseMatrix, TripletBuilder};

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric positive definite ({context})")]
    NotPositiveDefinite { context: String },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("singular matrix: pivot ratio {pivot_ratio:.3e} below {threshold:.1e}")]
    Singular { pivot_ratio: f64, threshold: f64 },
    #[error("residual {residual:.3e} exceeds {tol:.1e} after direct solve")]
    InaccurateSolve { residual: f64, tol: f64 },
    #[error("eigen decomposition failed to converge")]
    EigenFailure,
    #[error("dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },
}

/// Matrix-free square operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows(), self.ncols(), "operator must be square");
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }
}

/// Adapts a closure into a [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
