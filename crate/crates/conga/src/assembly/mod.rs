//! Mass matrices, stabilized CONGA systems and Hodge–Laplace pencils.

mod mass;
mod norms;
mod systems;

pub use mass::{assemble_mass, MassMatrices};
pub use norms::l2_error;
pub use systems::{
    assemble_harmonic_mass, assemble_hodge_laplace, assemble_maxwell_system, assemble_poisson_system,
    assemble_stabilization, curl_curl_pencil, maxwell_matrix, poisson_matrix, symmetrize, AssembledSystem,
    Discretization, SystemKind,
};

use crate::derham::DerhamError;
use crate::geometry::GeometryError;
use crate::linalg::LinalgError;

#[derive(Debug, thiserror::Error)]
pub enum AssemblyError {
    #[error("mass matrix of degree {form} is not positive definite")]
    NotPositiveDefinite { form: usize },
    #[error("stabilization parameter must be nonzero and finite, got {0}")]
    Stabilization(f64),
    #[error("not supported: {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Derham(#[from] DerhamError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
