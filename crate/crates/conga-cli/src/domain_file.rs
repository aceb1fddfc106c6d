//! Domain description files.
//!
//! A TOML document with an optional interface `tolerance` and one
//! `[[patch]]` table per patch, selected by `kind`:
//!
//! ```toml
//! tolerance = 1e-9
//!
//! [[patch]]
//! kind = "rectangle"
//! lower = [0.0, 0.0]
//! upper = [0.5, 1.0]
//!
//! [[patch]]
//! kind = "affine"
//! origin = [0.5, 0.0]
//! matrix = [[0.5, 0.0], [0.0, 1.0]]
//! ```
//!
//! Other kinds: `identity`; `polar_annulus` with `r_min`, `r_max`,
//! `theta_min`, `theta_max` and optional `center`; `smooth_deformation` with
//! `amplitude`, `lower`, `upper`.

use std::path::Path;

use conga::geometry::{detect_topology, MultipatchTopology, PatchMapping, Point, DEFAULT_TOLERANCE};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    tolerance: Option<f64>,
    patch: Vec<PatchSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PatchSpec {
    Identity {},
    Rectangle { lower: Point, upper: Point },
    Affine { origin: Point, matrix: [[f64; 2]; 2] },
    PolarAnnulus { r_min: f64, r_max: f64, theta_min: f64, theta_max: f64, #[serde(default)] center: Point },
    SmoothDeformation { amplitude: f64, lower: Point, upper: Point },
}

impl PatchSpec {
    fn build(&self) -> Result<PatchMapping, conga::geometry::GeometryError> {
        match *self {
            PatchSpec::Identity {} => Ok(PatchMapping::identity()),
            PatchSpec::Rectangle { lower, upper } => PatchMapping::rectangle(lower, upper),
            PatchSpec::Affine { origin, matrix } => PatchMapping::affine(origin, matrix),
            PatchSpec::PolarAnnulus { r_min, r_max, theta_min, theta_max, center } => {
                PatchMapping::polar_annulus(r_min, r_max, theta_min, theta_max, center)
            }
            PatchSpec::SmoothDeformation { amplitude, lower, upper } => {
                PatchMapping::smooth_deformation(amplitude, lower, upper)
            }
        }
    }
}

/// Parses a domain description and detects its interfaces. Every failure,
/// geometric ones included, is a configuration error.
pub fn parse_domain(text: &str) -> Result<MultipatchTopology, CliError> {
    let file: DomainFile = toml::from_str(text).map_err(|e| CliError::Config(format!("domain file: {}", e.message())))?;
    if file.patch.is_empty() {
        return Err(CliError::Config("domain file lists no patches".into()));
    }
    let patches = file
        .patch
        .iter()
        .enumerate()
        .map(|(k, p)| p.build().map_err(|e| CliError::Config(format!("domain file, patch {k}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    detect_topology(patches, file.tolerance.unwrap_or(DEFAULT_TOLERANCE))
        .map_err(|e| CliError::Config(format!("domain file: {e}")))
}

pub fn load_domain(path: &Path) -> Result<MultipatchTopology, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    parse_domain(&text)
}
