use std::f64::consts::PI;

use super::GeometryError;

pub type Point = [f64; 2];
/// `m[i][j] = ∂F_i / ∂x̂_j`.
pub type Mat2 = [[f64; 2]; 2];

/// Analytic patch map families.
#[derive(Debug, Clone, PartialEq)]
pub enum MappingKind {
    Identity,
    /// `F(x̂) = origin + A x̂`.
    Affine { origin: Point, matrix: Mat2 },
    /// `F(x̂, ŷ) = center + r (cos θ, sin θ)` with `r` linear in `x̂` and `θ`
    /// linear in `ŷ`.
    PolarAnnulus { r_min: f64, r_max: f64, theta_min: f64, theta_max: f64, center: Point },
    /// The box `[lower, upper]` (a subset of the unit square) pushed through
    /// the global map `(x, y) ↦ (x + a s, y + a s)`, `s = sin 2πx sin 2πy`.
    /// The deformation fixes the boundary of the unit square, so boxes that
    /// tile it stay conforming.
    SmoothDeformation { amplitude: f64, lower: Point, upper: Point },
}

/// Jacobian determinant and inverse metric `(DFᵀ DF)⁻¹` at a reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTerms {
    pub det: f64,
    pub g_inv: Mat2,
    pub jacobian: Mat2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchMapping {
    kind: MappingKind,
}

impl PatchMapping {
    /// Validates `J_F > 0` on a sample grid and cross-checks the analytic
    /// Jacobian against central differences.
    pub fn new(kind: MappingKind) -> Result<Self, GeometryError> {
        let m = Self { kind };
        const S: usize = 9;
        let h = 1e-6;
        for i in 0..S {
            for j in 0..S {
                let x = [i as f64 / (S - 1) as f64, j as f64 / (S - 1) as f64];
                let df = m.jacobian(x);
                let det = det2(&df);
                if det.is_nan() || det <= 0.0 {
                    return Err(GeometryError::NonPositiveJacobian { det, at: x });
                }
                let scale = df.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
                for d in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[d] += h;
                    xm[d] -= h;
                    let (fp, fm) = (m.map(xp), m.map(xm));
                    for c in 0..2 {
                        let fd = (fp[c] - fm[c]) / (2.0 * h);
                        if (fd - df[c][d]).abs() > 1e-6 * scale {
                            return Err(GeometryError::JacobianMismatch { at: x });
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Self { kind: MappingKind::Identity }
    }

    pub fn affine(origin: Point, matrix: Mat2) -> Result<Self, GeometryError> {
        Self::new(MappingKind::Affine { origin, matrix })
    }

    /// Axis-aligned box `[lower, upper]`.
    pub fn rectangle(lower: Point, upper: Point) -> Result<Self, GeometryError> {
        Self::affine(lower, [[upper[0] - lower[0], 0.0], [0.0, upper[1] - lower[1]]])
    }

    pub fn polar_annulus(r_min: f64, r_max: f64, theta_min: f64, theta_max: f64, center: Point) -> Result<Self, GeometryError> {
        if !(r_min > 0.0 && r_max > r_min && theta_max > theta_min) {
            return Err(GeometryError::InvalidParameters("annulus needs 0 < r_min < r_max and θ_min < θ_max".into()));
        }
        Self::new(MappingKind::PolarAnnulus { r_min, r_max, theta_min, theta_max, center })
    }

    pub fn smooth_deformation(amplitude: f64, lower: Point, upper: Point) -> Result<Self, GeometryError> {
        if !(upper[0] > lower[0] && upper[1] > lower[1]) {
            return Err(GeometryError::InvalidParameters("deformation box must have positive extent".into()));
        }
        Self::new(MappingKind::SmoothDeformation { amplitude, lower, upper })
    }

    pub fn kind(&self) -> &MappingKind {
        &self.kind
    }

    pub fn map(&self, x: Point) -> Point {
        match &self.kind {
            MappingKind::Identity => x,
            MappingKind::Affine { origin, matrix } => [
                origin[0] + matrix[0][0] * x[0] + matrix[0][1] * x[1],
                origin[1] + matrix[1][0] * x[0] + matrix[1][1] * x[1],
            ],
            MappingKind::PolarAnnulus { r_min, r_max, theta_min, theta_max, center } => {
                let r = r_min + x[0] * (r_max - r_min);
                let t = theta_min + x[1] * (theta_max - theta_min);
                [center[0] + r * t.cos(), center[1] + r * t.sin()]
            }
            MappingKind::SmoothDeformation { amplitude, lower, upper } => {
                let gx = lower[0] + x[0] * (upper[0] - lower[0]);
                let gy = lower[1] + x[1] * (upper[1] - lower[1]);
                let s = amplitude * (2.0 * PI * gx).sin() * (2.0 * PI * gy).sin();
                [gx + s, gy + s]
            }
        }
    }

    pub fn jacobian(&self, x: Point) -> Mat2 {
        match &self.kind {
            MappingKind::Identity => [[1.0, 0.0], [0.0, 1.0]],
            MappingKind::Affine { matrix, .. } => *matrix,
            MappingKind::PolarAnnulus { r_min, r_max, theta_min, theta_max, .. } => {
                let dr = r_max - r_min;
                let dt = theta_max - theta_min;
                let r = r_min + x[0] * dr;
                let t = theta_min + x[1] * dt;
                let (s, c) = t.sin_cos();
                [[dr * c, -r * dt * s], [dr * s, r * dt * c]]
            }
            MappingKind::SmoothDeformation { amplitude, lower, upper } => {
                let (ux, uy) = (upper[0] - lower[0], upper[1] - lower[1]);
                let gx = lower[0] + x[0] * ux;
                let gy = lower[1] + x[1] * uy;
                let k = 2.0 * PI;
                let sx = amplitude * k * (k * gx).cos() * (k * gy).sin();
                let sy = amplitude * k * (k * gx).sin() * (k * gy).cos();
                [[(1.0 + sx) * ux, sy * uy], [sx * ux, (1.0 + sy) * uy]]
            }
        }
    }

    pub fn metric_terms(&self, x: Point) -> Result<MetricTerms, GeometryError> {
        let df = self.jacobian(x);
        let det = det2(&df);
        if !det.is_finite() || det <= 0.0 {
            return Err(GeometryError::NonPositiveJacobian { det, at: x });
        }
        // DFᵀDF
        let g00 = df[0][0] * df[0][0] + df[1][0] * df[1][0];
        let g01 = df[0][0] * df[0][1] + df[1][0] * df[1][1];
        let g11 = df[0][1] * df[0][1] + df[1][1] * df[1][1];
        let gdet = det * det;
        Ok(MetricTerms { det, g_inv: [[g11 / gdet, -g01 / gdet], [-g01 / gdet, g00 / gdet]], jacobian: df })
    }
}

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `m v`.
pub fn mat_vec(m: &Mat2, v: Point) -> Point {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// `mᵀ v`.
pub fn mat_t_vec(m: &Mat2, v: Point) -> Point {
    [m[0][0] * v[0] + m[1][0] * v[1], m[0][1] * v[0] + m[1][1] * v[1]]
}

/// `m⁻¹ v`.
pub fn mat_inv_vec(m: &Mat2, v: Point) -> Point {
    let d = det2(m);
    [(m[1][1] * v[0] - m[0][1] * v[1]) / d, (-m[1][0] * v[0] + m[0][0] * v[1]) / d]
}

/// `m⁻ᵀ v`.
pub fn mat_inv_t_vec(m: &Mat2, v: Point) -> Point {
    let d = det2(m);
    [(m[1][1] * v[0] - m[1][0] * v[1]) / d, (-m[0][1] * v[0] + m[0][0] * v[1]) / d]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_metric() {
        let m = PatchMapping::identity();
        let t = m.metric_terms([0.3, 0.9]).unwrap();
        assert_eq!(t.det, 1.0);
        assert_eq!(t.g_inv, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn affine_metric() {
        let m = PatchMapping::affine([1.0, -1.0], [[2.0, 0.0], [0.0, 3.0]]).unwrap();
        let t = m.metric_terms([0.5, 0.5]).unwrap();
        assert_eq!(t.det, 6.0);
        assert!((t.g_inv[0][0] - 0.25).abs() < 1e-15);
        assert!((t.g_inv[1][1] - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(t.g_inv[0][1], 0.0);
    }

    #[test]
    fn polar_metric_matches_hand_and_finite_differences() {
        let m = PatchMapping::polar_annulus(1.0, 2.0, 0.0, PI / 2.0, [0.0, 0.0]).unwrap();
        let t = m.metric_terms([0.5, 0.5]).unwrap();
        assert!((t.det - 1.5 * PI / 2.0).abs() < 1e-14);
        let h = 1e-5;
        let x = [0.5, 0.5];
        let dfx: Vec<f64> = (0..2).map(|c| (m.map([x[0] + h, x[1]])[c] - m.map([x[0] - h, x[1]])[c]) / (2.0 * h)).collect();
        let dfy: Vec<f64> = (0..2).map(|c| (m.map([x[0], x[1] + h])[c] - m.map([x[0], x[1] - h])[c]) / (2.0 * h)).collect();
        let fd_det = dfx[0] * dfy[1] - dfx[1] * dfy[0];
        assert!((fd_det - t.det).abs() < 1e-8);
    }

    #[test]
    fn inverse_metric_is_spd_inverse() {
        let m = PatchMapping::smooth_deformation(0.1, [0.0, 0.5], [0.5, 1.0]).unwrap();
        let t = m.metric_terms([0.2, 0.7]).unwrap();
        let df = t.jacobian;
        let g = [
            [df[0][0] * df[0][0] + df[1][0] * df[1][0], df[0][0] * df[0][1] + df[1][0] * df[1][1]],
            [df[0][0] * df[0][1] + df[1][0] * df[1][1], df[0][1] * df[0][1] + df[1][1] * df[1][1]],
        ];
        for (i, gi) in g.iter().enumerate() {
            for j in 0..2 {
                let e: f64 = (0..2).map(|k| gi[k] * t.g_inv[k][j]).sum();
                assert!((e - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        assert_eq!(t.g_inv[0][1], t.g_inv[1][0]);
        assert!(t.g_inv[0][0] > 0.0 && det2(&t.g_inv) > 0.0);
    }

    #[test]
    fn deformation_jacobian_determinant_closed_form() {
        let a = 0.1;
        let m = PatchMapping::smooth_deformation(a, [0.0, 0.0], [1.0, 1.0]).unwrap();
        for &(x, y) in &[(0.1, 0.2), (0.7, 0.4), (0.33, 0.91)] {
            let j = det2(&m.jacobian([x, y]));
            let expect = 1.0 + 2.0 * PI * a * (2.0 * PI * (x + y)).sin();
            assert!((j - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn folded_maps_are_rejected() {
        assert!(matches!(
            PatchMapping::affine([0.0, 0.0], [[1.0, 0.0], [0.0, -1.0]]),
            Err(GeometryError::NonPositiveJacobian { .. })
        ));
        assert!(PatchMapping::smooth_deformation(0.3, [0.0, 0.0], [1.0, 1.0]).is_err());
        assert!(PatchMapping::polar_annulus(2.0, 1.0, 0.0, 1.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn inverse_helpers() {
        let m = [[2.0, 1.0], [0.5, 3.0]];
        let v = [1.0, -2.0];
        let w = mat_vec(&m, mat_inv_vec(&m, v));
        let u = mat_t_vec(&m, mat_inv_t_vec(&m, v));
        for k in 0..2 {
            assert!((w[k] - v[k]).abs() < 1e-15);
            assert!((u[k] - v[k]).abs() < 1e-15);
        }
    }
}
