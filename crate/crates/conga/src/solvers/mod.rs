//! Problem drivers: source problems, eigenproblems, magnetostatics and
//! leap-frog time stepping.

mod eigen;
mod magnetostatics;
mod static_problems;
pub mod testcases;
mod timedomain;

pub use eigen::{
    eig_curlcurl, harmonic_basis, predict_zero_eigenspace, relative_eigenvalue_error, EigenMode, EigenResult,
    HarmonicBasis, ZeroSpacePrediction, GAP_FACTOR, ZERO_TOL,
};
pub use magnetostatics::{solve_magnetostatic, MagnetostaticBc, MagnetostaticSolution, POSTCONDITION_TOL};
pub use static_problems::{solve_maxwell_harmonic, solve_poisson, CONFORMITY_TOL, DENSE_LIMIT};
pub use timedomain::{
    curl_norm_squared, gauss_error, maxwell_leapfrog, ConservationTrace, LeapfrogOptions, PotentialSource,
    SourceMode, TimeDomainState, TimeHorizon, TraceRecord, weak_curl,
};

use crate::assembly::AssemblyError;
use crate::derham::DerhamError;
use crate::linalg::LinalgError;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("system is singular (pivot ratio {pivot_ratio:.3e}); ω² may be a conforming eigenvalue")]
    IllPosed { pivot_ratio: f64 },
    #[error("iterative solve stopped after {iterations} iterations at residual {residual:.3e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("solution is not conforming: relative jump {relative:.3e}")]
    Nonconforming { relative: f64 },
    #[error("no clear spectral gap around {tol:.1e}: eigenvalue {value:.3e}")]
    SpectralGap { tol: f64, value: f64 },
    #[error("leap-frog blew up at step {step}: energy {energy:.3e} vs initial {initial:.3e}")]
    Instability { step: usize, energy: f64, initial: f64 },
    #[error("postcondition failed: {0}")]
    Postcondition(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Derham(#[from] DerhamError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
