use crate::assembly::AssemblyError;
use crate::bspline::SplineError;
use crate::derham::DerhamError;
use crate::geometry::GeometryError;
use crate::linalg::LinalgError;
use crate::solvers::SolverError;

/// Any failure surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Derham(#[from] DerhamError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
