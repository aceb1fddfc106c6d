//! Analytic patch mappings and the multipatch interface table.

pub mod domains;
mod mapping;
mod topology;

pub use mapping::{det2, mat_inv_t_vec, mat_inv_vec, mat_t_vec, mat_vec, Mat2, MappingKind, MetricTerms, PatchMapping, Point};
pub use topology::{detect_topology, Corner, Edge, InterfaceRecord, MultipatchTopology};

/// Default matching tolerance in physical coordinates.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("Jacobian determinant {det:.3e} is not positive at reference point {at:?}")]
    NonPositiveJacobian { det: f64, at: Point },
    #[error("analytic Jacobian disagrees with finite differences at {at:?}")]
    JacobianMismatch { at: Point },
    #[error("invalid mapping parameters: {0}")]
    InvalidParameters(String),
    #[error("non-conforming patches: {0}")]
    Conformity(String),
    #[error("unknown built-in domain '{0}'")]
    UnknownDomain(String),
}

/// Builds the topology of a built-in domain with the default tolerance.
pub fn builtin_topology(name: &str) -> Result<MultipatchTopology, GeometryError> {
    detect_topology(domains::builtin(name)?, DEFAULT_TOLERANCE)
}
