//! Dense factorizations backed by faer.

use std::ops::Range;

use faer::linalg::solvers::{Lblt, Llt, Solve};
use faer::{Mat, MatRef, Side};

use super::{LinalgError, SparseMatrix};

/// Cholesky factors of a block-diagonal SPD matrix, one per diagonal block.
#[derive(Debug)]
pub struct BlockCholesky {
    blocks: Vec<(Range<usize>, Llt<f64>)>,
    dim: usize,
}

impl BlockCholesky {
    /// `ranges` must tile `0..a.nrows()`; entries of `a` outside the blocks
    /// are ignored.
    pub fn new(a: &SparseMatrix, ranges: &[Range<usize>]) -> Result<Self, LinalgError> {
        let mut blocks = Vec::with_capacity(ranges.len());
        for (k, r) in ranges.iter().enumerate() {
            let block = a.slice(r.clone(), r.clone()).to_dense();
            let llt = block.llt(Side::Lower).map_err(|_| LinalgError::NotPositiveDefinite {
                context: format!("diagonal block {k}"),
            })?;
            blocks.push((r.clone(), llt));
        }
        Ok(Self { blocks, dim: a.nrows() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim, "block solve: rhs length");
        let mut x = vec![0.0; self.dim];
        for (r, llt) in &self.blocks {
            let mut rhs = Mat::from_fn(r.len(), 1, |i, _| b[r.start + i]);
            llt.solve_in_place(&mut rhs);
            for i in 0..r.len() {
                x[r.start + i] = rhs[(i, 0)];
            }
        }
        x
    }

    pub fn solve_mat(&self, b: &Mat<f64>) -> Mat<f64> {
        assert_eq!(b.nrows(), self.dim, "block solve: rhs rows");
        let mut x = Mat::zeros(b.nrows(), b.ncols());
        for (r, llt) in &self.blocks {
            let mut rhs = b.as_ref().subrows(r.start, r.len()).to_owned();
            llt.solve_in_place(&mut rhs);
            x.as_mut().subrows_mut(r.start, r.len()).copy_from(&rhs);
        }
        x
    }
}

/// Result of [`dense_generalized_symmetric_eig`].
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are `B`-orthonormal eigenvectors, when requested.
    pub vectors: Option<Mat<f64>>,
}

/// Solves `A v = λ B v` for symmetric `A` and SPD `B` by Cholesky reduction
/// to a standard symmetric problem.
pub fn dense_generalized_symmetric_eig(
    a: MatRef<'_, f64>,
    b: MatRef<'_, f64>,
    want_vectors: bool,
) -> Result<GeneralizedEigen, LinalgError> {
    let n = a.nrows();
    assert!(a.ncols() == n && b.nrows() == n && b.ncols() == n, "pencil must be square");
    if a.has_nan() || b.has_nan() || !a.is_all_finite() || !b.is_all_finite() {
        return Err(LinalgError::NonFinite("eigen pencil"));
    }
    let llt = b
        .llt(Side::Lower)
        .map_err(|_| LinalgError::NotPositiveDefinite { context: "right-hand pencil matrix".into() })?;
    let l = llt.L();
    // C = L⁻¹ A L⁻ᵀ
    let mut x = a.to_owned();
    l.solve_lower_triangular_in_place(&mut x);
    let mut c = x.transpose().to_owned();
    l.solve_lower_triangular_in_place(&mut c);
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    if !want_vectors {
        let values = c.self_adjoint_eigenvalues(Side::Lower).map_err(|_| LinalgError::EigenFailure)?;
        return Ok(GeneralizedEigen { values, vectors: None });
    }
    let evd = c.self_adjoint_eigen(Side::Lower).map_err(|_| LinalgError::EigenFailure)?;
    let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    let mut v = evd.U().to_owned();
    l.transpose().solve_upper_triangular_in_place(&mut v);
    Ok(GeneralizedEigen { values, vectors: Some(v) })
}

/// Symmetric indefinite factorization with pivot diagnostics.
#[derive(Debug)]
pub struct IndefiniteSolve {
    pub solution: Vec<f64>,
    /// Smallest over largest magnitude among the eigenvalues of the block
    /// diagonal factor.
    pub pivot_ratio: f64,
    pub residual: f64,
}

/// Pivot ratio below which a matrix is declared singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

/// Solves `A x = b` for symmetric nonsingular `A` with a Bunch–Kaufman
/// `LBLᵀ` factorization. Fails when the pivot ratio signals singularity or
/// the recomputed relative residual exceeds `1e-10`.
pub fn symmetric_indefinite_solve(a: MatRef<'_, f64>, b: &[f64]) -> Result<IndefiniteSolve, LinalgError> {
    let n = a.nrows();
    assert_eq!(b.len(), n, "indefinite solve: rhs length");
    if !a.is_all_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite("indefinite system"));
    }
    if n == 0 {
        return Ok(IndefiniteSolve { solution: vec![], pivot_ratio: 1.0, residual: 0.0 });
    }
    let lblt: Lblt<f64> = a.lblt(Side::Lower);
    let pivot_ratio = pivot_ratio(&lblt);
    if pivot_ratio < SINGULAR_PIVOT_RATIO {
        return Err(LinalgError::Singular { pivot_ratio, threshold: SINGULAR_PIVOT_RATIO });
    }
    let mut rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    lblt.solve_in_place(&mut rhs);
    let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    let ax = a * &rhs;
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rnorm = (0..n).map(|i| (b[i] - ax[(i, 0)]).powi(2)).sum::<f64>().sqrt();
    let residual = if bnorm > 0.0 { rnorm / bnorm } else { rnorm };
    const TOL: f64 = 1e-10;
    if !residual.is_finite() || residual > TOL {
        return Err(LinalgError::InaccurateSolve { residual, tol: TOL });
    }
    Ok(IndefiniteSolve { solution: x, pivot_ratio, residual })
}

fn pivot_ratio(f: &Lblt<f64>) -> f64 {
    let d = f.B_diag().column_vector();
    let s = f.B_subdiag().column_vector();
    let n = d.nrows();
    let mut mags = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && s[i] != 0.0 {
            // 2x2 block [[a, c], [c, b]]
            let (a, b, c) = (d[i], d[i + 1], s[i]);
            let m = 0.5 * (a + b);
            let r = (0.25 * (a - b) * (a - b) + c * c).sqrt();
            mags.push((m + r).abs());
            mags.push((m - r).abs());
            i += 2;
        } else {
            mags.push(d[i].abs());
            i += 1;
        }
    }
    let max = mags.iter().cloned().fold(0.0, f64::max);
    let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Number of singular values above `rtol * σ_max`.
///
/// The singular values are read off the symmetric embedding
/// `[[0, A], [Aᵀ, 0]]`, whose eigenvalues are `±σ`. faer's SVD returned a
/// spurious `1e-4` singular value for some rank-deficient projection
/// matrices; the symmetric eigensolver does not.
pub fn numerical_rank(a: MatRef<'_, f64>, rtol: f64) -> Result<usize, LinalgError> {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return Ok(0);
    }
    let jw = Mat::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
        (true, false) => a[(i, j - m)],
        (false, true) => a[(j, i - m)],
        _ => 0.0,
    });
    let ev = jw.self_adjoint_eigenvalues(Side::Lower).map_err(|_| LinalgError::EigenFailure)?;
    let smax = ev.iter().fold(0.0, |s: f64, v| s.max(*v));
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(ev.iter().filter(|&&v| v > rtol * smax).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> Mat<f64> {
        let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut a = &g * g.transpose();
        for i in 0..n {
            a[(i, i)] += n as f64;
        }
        a
    }

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> Mat<f64> {
        let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        Mat::from_fn(n, n, |i, j| g[(i, j)] + g[(j, i)])
    }

    #[test]
    fn standard_problem_sorted() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { [3.0, 1.0, 2.0][i] } else { 0.0 });
        let b = Mat::<f64>::identity(3, 3);
        let e = dense_generalized_symmetric_eig(a.as_ref(), b.as_ref(), false).unwrap();
        assert_eq!(e.values.len(), 3);
        for (v, r) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - r).abs() < 1e-14);
        }
    }

    #[test]
    fn equal_pencil_gives_unit_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_spd(12, &mut rng);
        let e = dense_generalized_symmetric_eig(a.as_ref(), a.as_ref(), false).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn random_pencil_residuals_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20;
        let a = random_sym(n, &mut rng);
        let b = random_spd(n, &mut rng);
        let e = dense_generalized_symmetric_eig(a.as_ref(), b.as_ref(), true).unwrap();
        let v = e.vectors.unwrap();
        let anorm = a.norm_max() * n as f64;
        for k in 0..n {
            let vk = v.col(k);
            let r = &a * vk - (&b * vk) * faer::Scale(e.values[k]);
            assert!(r.norm_l2() <= 1e-9 * anorm);
        }
        let g = v.transpose() * &b * &v;
        for i in 0..n {
            for j in 0..n {
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - d).abs() < 1e-10);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_indefinite_right_matrix() {
        let a = Mat::<f64>::identity(2, 2);
        let b = Mat::from_fn(2, 2, |i, j| if i == j { [1.0, -1.0][i] } else { 0.0 });
        assert!(dense_generalized_symmetric_eig(a.as_ref(), b.as_ref(), false).is_err());
    }

    #[test]
    fn indefinite_swap_system() {
        let a = Mat::from_fn(2, 2, |i, j| if i != j { 1.0 } else { 0.0 });
        let s = symmetric_indefinite_solve(a.as_ref(), &[1.0, 2.0]).unwrap();
        assert!((s.solution[0] - 2.0).abs() < 1e-15);
        assert!((s.solution[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn indefinite_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_sym(40, &mut rng);
        let b: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = symmetric_indefinite_solve(a.as_ref(), &b).unwrap();
        assert!(s.residual <= 1e-10);
    }

    #[test]
    fn indefinite_detects_singularity() {
        let a = Mat::from_fn(3, 3, |i, j| ((i + 1) * (j + 1)) as f64);
        let err = symmetric_indefinite_solve(a.as_ref(), &[1.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, LinalgError::Singular { .. } | LinalgError::InaccurateSolve { .. }));
    }

    #[test]
    fn indefinite_agrees_with_cg_on_spd() {
        use crate::linalg::{cg_solve, CgOptions};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_spd(30, &mut rng);
        let b: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let direct = symmetric_indefinite_solve(a.as_ref(), &b).unwrap().solution;
        let sp = SparseMatrix::from_dense(&a, 0.0);
        let (x, _) = cg_solve(&sp, &b, &CgOptions::default()).unwrap();
        for (u, v) in direct.iter().zip(&x) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    #[allow(clippy::single_range_in_vec_init)]
    fn block_cholesky_round_trip_and_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a1 = random_spd(4, &mut rng);
        let a2 = random_spd(3, &mut rng);
        let s1 = SparseMatrix::from_dense(&a1, 0.0);
        let s2 = SparseMatrix::from_dense(&a2, 0.0);
        let a = SparseMatrix::block_diag(&[&s1, &s2]);
        let f = BlockCholesky::new(&a, &[0..4, 4..7]).unwrap();
        let c: Vec<f64> = (0..7).map(|i| i as f64 - 2.5).collect();
        let x = f.solve(&a.mul_vec(&c));
        for (x, c) in x.iter().zip(&c) {
            assert!((x - c).abs() < 1e-11);
        }
        let mut b = a.mul_vec(&c);
        b[4..].iter_mut().for_each(|v| *v = 0.0);
        let x = f.solve(&b);
        assert!(x[4..].iter().all(|&v| v == 0.0));
        let scaled = BlockCholesky::new(&SparseMatrix::diagonal(&[2.0; 5]), &[0..5]).unwrap();
        assert!(scaled.solve(&[4.0; 5]).iter().all(|v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn rank_of_outer_product() {
        let u = Mat::from_fn(6, 1, |i, _| i as f64 + 1.0);
        let a = &u * u.transpose();
        assert_eq!(numerical_rank(a.as_ref(), 1e-12).unwrap(), 1);
        assert_eq!(numerical_rank(Mat::<f64>::identity(5, 5).as_ref(), 1e-12).unwrap(), 5);
        let wide = Mat::from_fn(2, 5, |i, j| if i == 0 { j as f64 } else { 2.0 * j as f64 });
        assert_eq!(numerical_rank(wide.as_ref(), 1e-12).unwrap(), 1);
    }
}
