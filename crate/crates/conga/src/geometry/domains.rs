//! Built-in multipatch domains.

use std::f64::consts::PI;

use super::mapping::{PatchMapping, Point};
use super::GeometryError;

/// Names accepted by [`builtin`].
pub const BUILTIN: [&str; 9] = [
    "unit_square",
    "two_patch_square",
    "square_2x2",
    "pi_square",
    "pi_square_2x2",
    "annulus",
    "deformed_square",
    "deformed_square_single",
    "l_shape",
];

/// Amplitude used by the built-in deformed squares.
pub const DEFORMATION_AMPLITUDE: f64 = 0.1;

pub fn builtin(name: &str) -> Result<Vec<PatchMapping>, GeometryError> {
    match name {
        "unit_square" => Ok(vec![PatchMapping::identity()]),
        "two_patch_square" => two_patch_square(),
        "square_2x2" => square_grid([0.0, 0.0], [1.0, 1.0], 2, 2),
        "pi_square" => square_grid([0.0, 0.0], [PI, PI], 1, 1),
        "pi_square_2x2" => square_grid([0.0, 0.0], [PI, PI], 2, 2),
        "annulus" => annulus(1.0, 2.0),
        "deformed_square" => deformed_square(DEFORMATION_AMPLITUDE, 2),
        "deformed_square_single" => deformed_square(DEFORMATION_AMPLITUDE, 1),
        "l_shape" => l_shape(),
        _ => Err(GeometryError::UnknownDomain(name.to_string())),
    }
}

/// Unit square split at `x = 1/2`.
pub fn two_patch_square() -> Result<Vec<PatchMapping>, GeometryError> {
    square_grid([0.0, 0.0], [1.0, 1.0], 2, 1)
}

/// `[lower, upper]` split into `nx × ny` equal rectangles.
pub fn square_grid(lower: Point, upper: Point, nx: usize, ny: usize) -> Result<Vec<PatchMapping>, GeometryError> {
    let mut out = Vec::with_capacity(nx * ny);
    let hx = (upper[0] - lower[0]) / nx as f64;
    let hy = (upper[1] - lower[1]) / ny as f64;
    for i in 0..nx {
        for j in 0..ny {
            let lo = [lower[0] + i as f64 * hx, lower[1] + j as f64 * hy];
            let hi = [
                if i + 1 == nx { upper[0] } else { lower[0] + (i + 1) as f64 * hx },
                if j + 1 == ny { upper[1] } else { lower[1] + (j + 1) as f64 * hy },
            ];
            out.push(PatchMapping::rectangle(lo, hi)?);
        }
    }
    Ok(out)
}

/// Ring `r_min ≤ |x| ≤ r_max` around the origin as four quarter annuli.
pub fn annulus(r_min: f64, r_max: f64) -> Result<Vec<PatchMapping>, GeometryError> {
    (0..4)
        .map(|q| PatchMapping::polar_annulus(r_min, r_max, q as f64 * PI / 2.0, (q + 1) as f64 * PI / 2.0, [0.0, 0.0]))
        .collect()
}

/// Unit square, split into `split × split` boxes, pushed through the smooth
/// sinusoidal deformation.
pub fn deformed_square(amplitude: f64, split: usize) -> Result<Vec<PatchMapping>, GeometryError> {
    let h = 1.0 / split as f64;
    let mut out = Vec::with_capacity(split * split);
    for i in 0..split {
        for j in 0..split {
            let lo = [i as f64 * h, j as f64 * h];
            let hi = [if i + 1 == split { 1.0 } else { (i + 1) as f64 * h }, if j + 1 == split { 1.0 } else { (j + 1) as f64 * h }];
            out.push(PatchMapping::smooth_deformation(amplitude, lo, hi)?);
        }
    }
    Ok(out)
}

/// `[-1,1]² \ [0,1]²` as three squares.
pub fn l_shape() -> Result<Vec<PatchMapping>, GeometryError> {
    Ok(vec![
        PatchMapping::rectangle([-1.0, -1.0], [0.0, 0.0])?,
        PatchMapping::rectangle([0.0, -1.0], [1.0, 0.0])?,
        PatchMapping::rectangle([-1.0, 0.0], [0.0, 1.0])?,
    ])
}
