use super::{axpy, dot, norm2, LinalgError, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone, Copy)]
pub struct LinearSolveReport {
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖`, recomputed from the returned iterate.
    pub residual: f64,
    pub status: SolveStatus,
}

#[derive(Debug, Clone)]
pub struct CgOptions {
    pub tol: f64,
    /// Defaults to `10 * dim` when `None`.
    pub max_iter: Option<usize>,
    /// Jacobi scaling with the given diagonal.
    pub diagonal: Option<Vec<f64>>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: None, diagonal: None }
    }
}

/// Preconditioned conjugate gradients for an SPD operator.
pub fn cg_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    opts: &CgOptions,
) -> Result<(Vec<f64>, LinearSolveReport), LinalgError> {
    let n = a.dim();
    assert_eq!(b.len(), n, "cg_solve: rhs length");
    if b.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite("cg right-hand side"));
    }
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        let report = LinearSolveReport { iterations: 0, residual: 0.0, status: SolveStatus::Converged };
        return Ok((x, report));
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let precond = |r: &[f64], z: &mut [f64]| match &opts.diagonal {
        Some(d) => z.iter_mut().zip(r).zip(d).for_each(|((z, r), d)| *z = r / d),
        None => z.copy_from_slice(r),
    };
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    while iterations < max_iter {
        if norm2(&r) <= opts.tol * bnorm {
            break;
        }
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(LinalgError::NonFinite("cg iteration"));
        }
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        iterations += 1;
    }
    // the reported residual never trusts the recursion
    a.apply(&x, &mut ap);
    let res: f64 = b.iter().zip(&ap).map(|(b, ax)| (b - ax) * (b - ax)).sum::<f64>().sqrt() / bnorm;
    if !res.is_finite() {
        return Err(LinalgError::NonFinite("cg residual"));
    }
    let status = if res <= opts.tol { SolveStatus::Converged } else { SolveStatus::NotConverged };
    Ok((x, LinearSolveReport { iterations, residual: res, status }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;

    #[test]
    fn identity_converges_in_one_step() {
        let a = SparseMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let (x, rep) = cg_solve(&a, &b, &CgOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.status, SolveStatus::Converged);
        for (x, b) in x.iter().zip(&b) {
            assert!((x - b).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_system() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        let a = SparseMatrix::diagonal(&d);
        let (x, rep) = cg_solve(&a, &[1.0; 10], &CgOptions::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        for (i, x) in x.iter().enumerate() {
            assert!((x - 1.0 / (i + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = SparseMatrix::identity(3);
        let (x, rep) = cg_solve(&a, &[0.0; 3], &CgOptions::default()).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn rejects_non_finite_rhs() {
        let a = SparseMatrix::identity(2);
        assert!(cg_solve(&a, &[f64::NAN, 1.0], &CgOptions::default()).is_err());
    }
}
