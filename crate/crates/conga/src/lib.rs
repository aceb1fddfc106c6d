//! Broken finite element exterior calculus on 2D mapped multipatch domains.
//!
//! The crate builds broken tensor-product spline spaces of the grad–curl
//! sequence, their conforming projections and operator matrices, and uses
//! them to solve Poisson, time-harmonic and time-dependent Maxwell,
//! eigenvalue and magnetostatic problems.

pub mod assembly;
pub mod bspline;
pub mod derham;
pub mod geometry;
pub mod linalg;
pub mod quadrature;
pub mod solvers;

mod error;

pub use error::Error;

/// Library version, embedded in output files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Result<T, E = Error> = std::result::Result<T, E>;
