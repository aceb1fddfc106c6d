use crate::assembly::{AssembledSystem, Discretization, SystemKind};
use crate::derham::{FemField, FormDegree};
use crate::linalg::{cg_solve, symmetric_indefinite_solve, CgOptions, LinalgError, SolveStatus};

use super::SolverError;

/// Systems above this size go to conjugate gradients when they are SPD.
pub const DENSE_LIMIT: usize = 6000;

/// Relative tolerance of the conformity check on homogeneous solution parts.
pub const CONFORMITY_TOL: f64 = 1e-9;

fn form_of(kind: SystemKind) -> FormDegree {
    match kind {
        SystemKind::Poisson => FormDegree::Zero,
        SystemKind::Maxwell { .. } => FormDegree::One,
    }
}

fn solve_system(d: &Discretization, sys: &AssembledSystem) -> Result<FemField, SolverError> {
    let n = sys.matrix.nrows();
    let x = if n <= DENSE_LIMIT {
        match symmetric_indefinite_solve(sys.matrix.to_dense().as_ref(), &sys.rhs) {
            Ok(s) => s.solution,
            Err(LinalgError::Singular { pivot_ratio, .. }) => return Err(SolverError::IllPosed { pivot_ratio }),
            Err(e) => return Err(e.into()),
        }
    } else if sys.kind == SystemKind::Poisson {
        let diag: Vec<f64> = (0..n).map(|i| sys.matrix.get(i, i)).collect();
        let (x, report) = cg_solve(&sys.matrix, &sys.rhs, &CgOptions { diagonal: Some(diag), ..Default::default() })?;
        if report.status != SolveStatus::Converged {
            return Err(SolverError::NotConverged { iterations: report.iterations, residual: report.residual });
        }
        x
    } else {
        return Err(LinalgError::TooLarge { dim: n, limit: DENSE_LIMIT }.into());
    };
    let form = form_of(sys.kind);
    let jump: Vec<f64> = x.iter().zip(sys.projection.mul_vec(&x)).map(|(a, b)| a - b).collect();
    let (jn, xn) = (d.mass.norm(form, &jump), d.mass.norm(form, &x));
    if jn > CONFORMITY_TOL * xn {
        return Err(SolverError::Nonconforming { relative: jn / xn });
    }
    let full: Vec<f64> = x.iter().zip(&sys.offset).map(|(a, b)| a + b).collect();
    Ok(FemField::new(d.complex.space(form).clone(), full)?)
}

/// Solves the stabilized Poisson system; the returned field includes the
/// boundary lifting.
pub fn solve_poisson(d: &Discretization, sys: &AssembledSystem) -> Result<FemField, SolverError> {
    if sys.kind != SystemKind::Poisson {
        return Err(SolverError::Config("expected a Poisson system".into()));
    }
    solve_system(d, sys)
}

/// Solves the stabilized time-harmonic Maxwell system. A resonant `ω`
/// shows up as a vanishing pivot and is reported as ill-posed.
pub fn solve_maxwell_harmonic(d: &Discretization, sys: &AssembledSystem) -> Result<FemField, SolverError> {
    if !matches!(sys.kind, SystemKind::Maxwell { .. }) {
        return Err(SolverError::Config("expected a Maxwell system".into()));
    }
    solve_system(d, sys)
}
