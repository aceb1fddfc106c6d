use faer::Mat;

use crate::assembly::{assemble_harmonic_mass, assemble_stabilization, Discretization};
use crate::derham::{BoundaryCondition, FemField, Field, FormDegree};
use crate::linalg::{symmetric_indefinite_solve, LinalgError};

use super::{HarmonicBasis, SolverError, DENSE_LIMIT};

/// `B·n = 0` (pseudo-vacuum, homogeneous tangential projection) or
/// `n×B = 0` via the regularized metallic formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagnetostaticBc {
    PseudoVacuum,
    Metallic,
}

impl MagnetostaticBc {
    pub fn projection_bc(self) -> BoundaryCondition {
        match self {
            MagnetostaticBc::PseudoVacuum => BoundaryCondition::Homogeneous,
            MagnetostaticBc::Metallic => BoundaryCondition::Inhomogeneous,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MagnetostaticSolution {
    pub b: FemField,
    pub p: FemField,
    pub z: Vec<f64>,
    /// `‖p‖_𝕄 / ‖B‖_𝕄`
    pub p_relative: f64,
    /// `|z| / ‖B‖_𝕄`
    pub z_relative: f64,
    /// `‖(𝕀 − ℙ¹)B‖_𝕄 / ‖B‖_𝕄`
    pub jump_relative: f64,
    /// `max |⟨h, B⟩| / ‖B‖_𝕄` over the harmonic basis.
    pub harmonic_relative: f64,
}

/// Postcondition tolerance on the auxiliary unknowns and the conformity of `B`.
pub const POSTCONDITION_TOL: f64 = 1e-8;

fn add_sparse(dst: &mut Mat<f64>, a: &crate::linalg::SparseMatrix, r0: usize, c0: usize, scale: f64) {
    for (i, j, v) in a.triplets() {
        dst[(r0 + i, c0 + j)] += scale * v;
    }
}

/// Solves the saddle system for `(p, B, z)` with source current `J`
/// (a scalar ℓ=2 field).
pub fn solve_magnetostatic(
    d: &Discretization,
    bc: MagnetostaticBc,
    alpha0: f64,
    alpha1: f64,
    current: Field<'_>,
    harmonic: &HarmonicBasis,
) -> Result<MagnetostaticSolution, SolverError> {
    let pbc = bc.projection_bc();
    if harmonic.bc != pbc {
        return Err(SolverError::Config("harmonic basis built for the other boundary condition".into()));
    }
    for (name, a) in [("α⁰", alpha0), ("α¹", alpha1)] {
        if a == 0.0 || !a.is_finite() {
            return Err(SolverError::Config(format!("{name} must be nonzero, got {a}")));
        }
    }
    if bc == MagnetostaticBc::Metallic && alpha0 <= 0.0 {
        return Err(SolverError::Config("metallic variant needs α⁰ > 0".into()));
    }
    let (n0, n1, nh) = (d.dim(FormDegree::Zero), d.dim(FormDegree::One), harmonic.len());
    let n = n0 + n1 + nh;
    if n > DENSE_LIMIT {
        return Err(LinalgError::TooLarge { dim: n, limit: DENSE_LIMIT }.into());
    }
    let (m0, m1, m2) =
        (d.mass.matrix(FormDegree::Zero), d.mass.matrix(FormDegree::One), d.mass.matrix(FormDegree::Two));
    let gp = d.grad_conforming(pbc);
    let cp = d.curl_conforming(pbc);
    let m1gp = m1.matmul(&gp);
    let curl_curl = cp.transpose().matmul(m2).matmul(&cp);
    let h = harmonic.matrix();
    let mh = assemble_harmonic_mass(d, &h);

    let mut a = Mat::<f64>::zeros(n, n);
    add_sparse(&mut a, &assemble_stabilization(d.p0(pbc), m0), 0, 0, alpha0);
    if bc == MagnetostaticBc::Metallic {
        add_sparse(&mut a, m0, 0, 0, 1.0);
    }
    add_sparse(&mut a, &m1gp.transpose(), 0, n0, 1.0);
    add_sparse(&mut a, &m1gp, n0, 0, 1.0);
    add_sparse(&mut a, &curl_curl, n0, n0, 1.0);
    add_sparse(&mut a, &assemble_stabilization(d.p1(pbc), m1), n0, n0, alpha1);
    for j in 0..nh {
        for i in 0..n1 {
            a[(n0 + i, n0 + n1 + j)] += mh[(i, j)];
            a[(n0 + n1 + j, n0 + i)] += mh[(i, j)];
        }
    }
    let a = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut rhs = vec![0.0; n];
    let jm = d.moments(FormDegree::Two, current)?;
    rhs[n0..n0 + n1].copy_from_slice(&cp.tr_mul_vec(&jm));

    let x = match symmetric_indefinite_solve(a.as_ref(), &rhs) {
        Ok(s) => s.solution,
        Err(LinalgError::Singular { pivot_ratio, .. }) => return Err(SolverError::IllPosed { pivot_ratio }),
        Err(e) => return Err(e.into()),
    };
    let (p, rest) = x.split_at(n0);
    let (b, z) = rest.split_at(n1);

    let bn = d.mass.norm(FormDegree::One, b);
    let rel = |v: f64| if bn > 0.0 { v / bn } else { v };
    let jump: Vec<f64> = b.iter().zip(d.p1(pbc).mul_vec(b)).map(|(x, y)| x - y).collect();
    let hb: Vec<f64> = (0..nh).map(|j| (0..n1).map(|i| mh[(i, j)] * b[i]).sum()).collect();
    let sol = MagnetostaticSolution {
        p_relative: rel(d.mass.norm(FormDegree::Zero, p)),
        z_relative: rel(z.iter().map(|v| v * v).sum::<f64>().sqrt()),
        jump_relative: rel(d.mass.norm(FormDegree::One, &jump)),
        harmonic_relative: rel(hb.iter().fold(0.0, |m: f64, v| m.max(v.abs()))),
        b: FemField::new(d.complex.v1().clone(), b.to_vec())?,
        p: FemField::new(d.complex.v0().clone(), p.to_vec())?,
        z: z.to_vec(),
    };
    for (name, v) in [
        ("‖p‖", sol.p_relative),
        ("|z|", sol.z_relative),
        ("‖(I−P¹)B‖", sol.jump_relative),
        ("⟨h, B⟩", sol.harmonic_relative),
    ] {
        if v > POSTCONDITION_TOL {
            return Err(SolverError::Postcondition(format!("{name} relative {v:.3e}")));
        }
    }
    Ok(sol)
}
