use crate::bspline::univariate_incidence;
use crate::linalg::{SparseMatrix, TripletBuilder};

use super::space::DeRhamComplex;

/// Patch-diagonal gradient and curl incidence matrices `(𝔾, ℂ)`.
///
/// On each patch `𝔾 = [D ⊗ I; I ⊗ D]` and `ℂ = [−I' ⊗ D, D ⊗ I']`, with `D`
/// the univariate incidence and `I'` the identity on M-splines. They do not
/// depend on the mapping.
pub fn assemble_incidence(complex: &DeRhamComplex) -> (SparseMatrix, SparseMatrix) {
    let (v0, v1, v2) = (complex.v0(), complex.v1(), complex.v2());
    let d = univariate_incidence(complex.knots());
    let n = complex.knots().n_basis();
    let id_n = SparseMatrix::identity(n);
    let id_m = SparseMatrix::identity(n - 1);
    let g_patch = SparseMatrix::vstack(&[&SparseMatrix::kron(&d, &id_n), &SparseMatrix::kron(&id_n, &d)]);
    let c_patch =
        SparseMatrix::hstack(&[&SparseMatrix::kron(&id_m, &d).scale(-1.0), &SparseMatrix::kron(&d, &id_m)]);
    let k = complex.topology().n_patches();
    let grad = repeat_block(&g_patch, k, v1.dim(), v0.dim());
    let curl = repeat_block(&c_patch, k, v2.dim(), v1.dim());
    (grad, curl)
}

fn repeat_block(block: &SparseMatrix, k: usize, nrows: usize, ncols: usize) -> SparseMatrix {
    let (r, c) = block.shape();
    let mut t = TripletBuilder::with_capacity(nrows, ncols, k * block.nnz());
    for p in 0..k {
        for (i, j, v) in block.triplets() {
            t.push(p * r + i, p * c + j, v);
        }
    }
    t.build()
}
