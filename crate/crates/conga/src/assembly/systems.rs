use std::sync::Arc;

use faer::Mat;

use crate::derham::{
    boundary_dof_mask, collocation_solve, default_dof_points, geometric_dofs, moments, BoundaryCondition,
    DeRhamComplex, DeRhamOperatorSet, DerhamError, Field, FormDegree, QuadratureGrid,
};
use crate::geometry::MultipatchTopology;
use crate::linalg::SparseMatrix;

use super::mass::MassMatrices;
use super::AssemblyError;

/// Everything needed to assemble systems on one mesh: spaces, operator
/// matrices, mass matrices and the quadrature they were built with.
#[derive(Debug)]
pub struct Discretization {
    pub complex: DeRhamComplex,
    pub ops: DeRhamOperatorSet,
    pub mass: MassMatrices,
    pub quad: QuadratureGrid,
    /// Gauss points per knot segment in edge and cell DoFs.
    pub dof_points: usize,
}

impl Discretization {
    /// Mass and moment quadrature with `p + 1` points per cell and direction.
    pub fn new(topology: Arc<MultipatchTopology>, p: usize, n_cells: usize) -> Result<Self, AssemblyError> {
        Self::with_quadrature(topology, p, n_cells, p + 1)
    }

    pub fn with_quadrature(
        topology: Arc<MultipatchTopology>,
        p: usize,
        n_cells: usize,
        q: usize,
    ) -> Result<Self, AssemblyError> {
        let complex = DeRhamComplex::new(topology, p, n_cells)?;
        let ops = DeRhamOperatorSet::new(&complex)?;
        let quad = QuadratureGrid::new(&complex, q);
        let mass = MassMatrices::new(&complex, &quad)?;
        Ok(Self { complex, ops, mass, quad, dof_points: default_dof_points(p) })
    }

    pub fn dim(&self, form: FormDegree) -> usize {
        self.complex.space(form).dim()
    }

    pub fn p0(&self, bc: BoundaryCondition) -> &SparseMatrix {
        self.ops.projection(FormDegree::Zero, bc).expect("ℓ=0 projection")
    }

    pub fn p1(&self, bc: BoundaryCondition) -> &SparseMatrix {
        self.ops.projection(FormDegree::One, bc).expect("ℓ=1 projection")
    }

    /// `𝔾 ℙ⁰`
    pub fn grad_conforming(&self, bc: BoundaryCondition) -> SparseMatrix {
        self.ops.grad.matmul(self.p0(bc))
    }

    /// `ℂ ℙ¹`
    pub fn curl_conforming(&self, bc: BoundaryCondition) -> SparseMatrix {
        self.ops.curl.matmul(self.p1(bc))
    }

    /// Moments `⟨v, Λ_i⟩` with the mass quadrature.
    pub fn moments(&self, form: FormDegree, field: Field<'_>) -> Result<Vec<f64>, AssemblyError> {
        Ok(moments(&self.complex, form, field, &self.quad)?)
    }

    pub fn geometric_dofs(&self, form: FormDegree, field: Field<'_>) -> Result<Vec<f64>, AssemblyError> {
        Ok(geometric_dofs(&self.complex, form, field, self.dof_points)?)
    }

    /// Primal projection coefficients `𝕂⁻¹ σ(v)`.
    pub fn primal_projection(&self, form: FormDegree, field: Field<'_>) -> Result<Vec<f64>, AssemblyError> {
        let sigma = self.geometric_dofs(form, field)?;
        Ok(collocation_solve(&self.complex, self.complex.space(form), &sigma))
    }

    /// Spline whose geometric DoFs agree with those of `data` on the
    /// boundary and vanish elsewhere.
    pub fn boundary_lifting(&self, form: FormDegree, data: Field<'_>) -> Result<Vec<f64>, AssemblyError> {
        let space = self.complex.space(form);
        let mut sigma = self.geometric_dofs(form, data)?;
        let mask = boundary_dof_mask(space)?;
        sigma.iter_mut().zip(&mask).filter(|(_, &m)| !m).for_each(|(s, _)| *s = 0.0);
        Ok(collocation_solve(&self.complex, space, &sigma))
    }
}

/// `(𝕀 − ℙ)ᵀ 𝕄 (𝕀 − ℙ)`
pub fn assemble_stabilization(projection: &SparseMatrix, mass: &SparseMatrix) -> SparseMatrix {
    let jump = SparseMatrix::identity(projection.nrows()).sub(projection);
    symmetrize(&jump.transpose().matmul(mass).matmul(&jump))
}

/// `½ (A + Aᵀ)`
pub fn symmetrize(a: &SparseMatrix) -> SparseMatrix {
    SparseMatrix::lin_comb(0.5, a, 0.5, &a.transpose())
}

/// `Bᵀ A B`
fn congruence(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    b.transpose().matmul(a).matmul(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemKind {
    Poisson,
    Maxwell { omega: f64 },
}

/// A stabilized CONGA system `A x = rhs`; the discrete solution is
/// `x + offset`, where `offset` is the conforming boundary lifting.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub kind: SystemKind,
    pub alpha: f64,
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub offset: Vec<f64>,
    /// The homogeneous conforming projection the unknown lives in.
    pub projection: SparseMatrix,
}

fn check_alpha(alpha: f64) -> Result<(), AssemblyError> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(AssemblyError::Stabilization(alpha));
    }
    Ok(())
}

fn check_len(v: &[f64], n: usize) -> Result<(), AssemblyError> {
    if v.len() != n {
        return Err(DerhamError::Length { expected: n, got: v.len() }.into());
    }
    Ok(())
}

/// Stabilized Poisson matrix
/// `(𝔾ℙ⁰)ᵀ𝕄¹𝔾ℙ⁰ + α(𝕀−ℙ⁰)ᵀ𝕄⁰(𝕀−ℙ⁰)` with homogeneous `ℙ⁰`.
pub fn poisson_matrix(d: &Discretization, alpha: f64) -> SparseMatrix {
    let p = d.p0(BoundaryCondition::Homogeneous);
    let gp = d.grad_conforming(BoundaryCondition::Homogeneous);
    let stiff = congruence(d.mass.matrix(FormDegree::One), &gp);
    let stab = assemble_stabilization(p, d.mass.matrix(FormDegree::Zero));
    symmetrize(&SparseMatrix::lin_comb(1.0, &stiff, alpha, &stab))
}

/// `−Δφ = f`, with boundary values taken from the broken `lifting`
/// coefficients (see [`Discretization::boundary_lifting`]), zero when absent.
pub fn assemble_poisson_system(
    d: &Discretization,
    alpha: f64,
    source: Field<'_>,
    lifting: Option<&[f64]>,
) -> Result<AssembledSystem, AssemblyError> {
    check_alpha(alpha)?;
    let hom = BoundaryCondition::Homogeneous;
    let p = d.p0(hom);
    let matrix = poisson_matrix(d, alpha);
    let m = d.moments(FormDegree::Zero, source)?;
    let mut rhs = p.tr_mul_vec(&m);
    let mut offset = vec![0.0; d.dim(FormDegree::Zero)];
    if let Some(lift) = lifting {
        check_len(lift, offset.len())?;
        offset = d.p0(BoundaryCondition::Inhomogeneous).mul_vec(lift);
        let gp = d.grad_conforming(hom);
        let flux = d.mass.matrix(FormDegree::One).mul_vec(&d.ops.grad.mul_vec(&offset));
        let corr = gp.tr_mul_vec(&flux);
        rhs.iter_mut().zip(&corr).for_each(|(r, c)| *r -= c);
    }
    Ok(AssembledSystem { kind: SystemKind::Poisson, alpha, matrix, rhs, offset, projection: p.clone() })
}

/// `(ℙ¹)ᵀ(−ω²𝕄¹ + ℂᵀ𝕄²ℂ)ℙ¹ + α(𝕀−ℙ¹)ᵀ𝕄¹(𝕀−ℙ¹)` with homogeneous `ℙ¹`.
pub fn maxwell_matrix(d: &Discretization, omega: f64, alpha: f64) -> SparseMatrix {
    let p = d.p1(BoundaryCondition::Homogeneous);
    let op = maxwell_operator(d, omega);
    let stab = assemble_stabilization(p, d.mass.matrix(FormDegree::One));
    symmetrize(&SparseMatrix::lin_comb(1.0, &congruence(&op, p), alpha, &stab))
}

/// Broken `−ω²𝕄¹ + ℂᵀ𝕄²ℂ`.
fn maxwell_operator(d: &Discretization, omega: f64) -> SparseMatrix {
    let cc = congruence(d.mass.matrix(FormDegree::Two), &d.ops.curl);
    SparseMatrix::lin_comb(-omega * omega, d.mass.matrix(FormDegree::One), 1.0, &cc)
}

/// `curl curl u − ω²u = J`, with tangential boundary values taken from the
/// broken `lifting` coefficients, zero when absent.
pub fn assemble_maxwell_system(
    d: &Discretization,
    omega: f64,
    alpha: f64,
    source: Field<'_>,
    lifting: Option<&[f64]>,
) -> Result<AssembledSystem, AssemblyError> {
    check_alpha(alpha)?;
    let p = d.p1(BoundaryCondition::Homogeneous);
    let matrix = maxwell_matrix(d, omega, alpha);
    let m = d.moments(FormDegree::One, source)?;
    let mut rhs = p.tr_mul_vec(&m);
    let mut offset = vec![0.0; d.dim(FormDegree::One)];
    if let Some(lift) = lifting {
        check_len(lift, offset.len())?;
        offset = d.p1(BoundaryCondition::Inhomogeneous).mul_vec(lift);
        let corr = p.tr_mul_vec(&maxwell_operator(d, omega).mul_vec(&offset));
        rhs.iter_mut().zip(&corr).for_each(|(r, c)| *r -= c);
    }
    Ok(AssembledSystem { kind: SystemKind::Maxwell { omega }, alpha, matrix, rhs, offset, projection: p.clone() })
}

/// Left and right matrices of the curl-curl pencil
/// `(ℂℙ¹)ᵀ𝕄²ℂℙ¹ u = λ [(ℙ¹)ᵀ𝕄¹ℙ¹ + (𝕀−ℙ¹)ᵀ𝕄¹(𝕀−ℙ¹)] u`.
pub fn curl_curl_pencil(d: &Discretization, bc: BoundaryCondition) -> (Mat<f64>, Mat<f64>) {
    let p = d.p1(bc);
    let m1 = d.mass.matrix(FormDegree::One);
    let a = symmetrize(&congruence(d.mass.matrix(FormDegree::Two), &d.curl_conforming(bc)));
    let b = symmetrize(&congruence(m1, p).add(&assemble_stabilization(p, m1)));
    (a.to_dense(), b.to_dense())
}

/// Symmetric Hodge–Laplace pencil `(L, 𝕄^ℓ)`, dense.
///
/// ℓ=0 gives the Poisson matrix. ℓ=1 gives
/// `(ℂℙ¹)ᵀ𝕄²ℂℙ¹ + 𝕄¹𝔾ℙ⁰(𝕄⁰)⁻¹(𝔾ℙ⁰)ᵀ𝕄¹ + α(𝕀−ℙ¹)ᵀ𝕄¹(𝕀−ℙ¹)`.
pub fn assemble_hodge_laplace(
    d: &Discretization,
    form: FormDegree,
    bc: BoundaryCondition,
    alpha: f64,
) -> Result<(Mat<f64>, Mat<f64>), AssemblyError> {
    check_alpha(alpha)?;
    match form {
        FormDegree::Zero => {
            let p = d.p0(bc);
            let gp = d.grad_conforming(bc);
            let stiff = congruence(d.mass.matrix(FormDegree::One), &gp);
            let stab = assemble_stabilization(p, d.mass.matrix(FormDegree::Zero));
            let l = symmetrize(&SparseMatrix::lin_comb(1.0, &stiff, alpha, &stab));
            Ok((l.to_dense(), d.mass.matrix(FormDegree::Zero).to_dense()))
        }
        FormDegree::One => {
            let m1 = d.mass.matrix(FormDegree::One);
            let p = d.p1(bc);
            let cc = congruence(d.mass.matrix(FormDegree::Two), &d.curl_conforming(bc));
            let stab = assemble_stabilization(p, m1);
            let l = symmetrize(&SparseMatrix::lin_comb(1.0, &cc, alpha, &stab));
            // 𝕄¹𝔾ℙ⁰ (𝕄⁰)⁻¹ (𝔾ℙ⁰)ᵀ𝕄¹
            let w = m1.matmul(&d.grad_conforming(bc));
            let wt = w.transpose().to_dense();
            let inv = d.mass.factor(FormDegree::Zero).solve_mat(&wt);
            let gd = wt.transpose() * &inv;
            let mut dense = l.to_dense();
            let n = dense.nrows();
            for j in 0..n {
                for i in 0..n {
                    dense[(i, j)] += 0.5 * (gd[(i, j)] + gd[(j, i)]);
                }
            }
            Ok((dense, m1.to_dense()))
        }
        FormDegree::Two => Err(AssemblyError::Unsupported("Hodge–Laplace pencil for ℓ=2")),
    }
}

/// Rectangular `𝕄^{1,H} = 𝕄¹ H` for harmonic coefficient columns `H`.
pub fn assemble_harmonic_mass(d: &Discretization, harmonic: &Mat<f64>) -> Mat<f64> {
    d.mass.matrix(FormDegree::One).mul_dense(harmonic)
}
