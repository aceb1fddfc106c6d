//! Broken spline spaces of the grad–curl sequence and their operators.

mod conforming;
mod dofs;
mod dual;
mod incidence;
mod quadgrid;
mod space;

pub use conforming::{
    assemble_conforming_projection, boundary_dof_mask, geometric_conforming_projection, BoundaryCondition,
};
pub use dofs::{
    collocation_apply, collocation_matrix, collocation_solve, default_dof_points, geometric_dofs, primal_projection,
    Field,
};
pub use dual::{dual_projection_coeffs, evaluate_field, moments};
pub use incidence::assemble_incidence;
pub use quadgrid::QuadratureGrid;
pub use space::{build_spaces, BrokenFemSpace, ComponentKinds, DeRhamComplex, FemField, FormDegree};

use crate::bspline::SplineError;
use crate::linalg::SparseMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DerhamError {
    #[error("invalid discretization: {0}")]
    Config(String),
    #[error("expected a vector of length {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error("inconsistent interface data: {0}")]
    Consistency(String),
    #[error("this operation needs {0}")]
    FieldKind(&'static str),
}

/// Operator matrices of the broken sequence in the B-spline basis.
#[derive(Debug, Clone)]
pub struct DeRhamOperatorSet {
    pub grad: SparseMatrix,
    pub curl: SparseMatrix,
    pub p0: SparseMatrix,
    pub p0_hom: SparseMatrix,
    pub p1: SparseMatrix,
    pub p1_hom: SparseMatrix,
    pub collocation: [SparseMatrix; 3],
}

impl DeRhamOperatorSet {
    pub fn new(complex: &DeRhamComplex) -> Result<Self, DerhamError> {
        use BoundaryCondition::{Homogeneous as Hom, Inhomogeneous as Inh};
        let (grad, curl) = assemble_incidence(complex);
        Ok(Self {
            grad,
            curl,
            p0: assemble_conforming_projection(complex, FormDegree::Zero, Inh)?,
            p0_hom: assemble_conforming_projection(complex, FormDegree::Zero, Hom)?,
            p1: assemble_conforming_projection(complex, FormDegree::One, Inh)?,
            p1_hom: assemble_conforming_projection(complex, FormDegree::One, Hom)?,
            collocation: [FormDegree::Zero, FormDegree::One, FormDegree::Two].map(|f| collocation_matrix(complex, f)),
        })
    }

    pub fn projection(&self, form: FormDegree, bc: BoundaryCondition) -> Option<&SparseMatrix> {
        match (form, bc) {
            (FormDegree::Zero, BoundaryCondition::Inhomogeneous) => Some(&self.p0),
            (FormDegree::Zero, BoundaryCondition::Homogeneous) => Some(&self.p0_hom),
            (FormDegree::One, BoundaryCondition::Inhomogeneous) => Some(&self.p1),
            (FormDegree::One, BoundaryCondition::Homogeneous) => Some(&self.p1_hom),
            (FormDegree::Two, _) => None,
        }
    }
}
