//! Analytic fields used by the registered test cases.

use std::f64::consts::PI;

use crate::geometry::Point;

/// `φ = sin(πx) cos(πy)`
pub fn sincos(p: Point) -> f64 {
    (PI * p[0]).sin() * (PI * p[1]).cos()
}

/// `−Δφ` for [`sincos`].
pub fn sincos_laplace_source(p: Point) -> f64 {
    2.0 * PI * PI * sincos(p)
}

/// `u = (sin πy, sin πx cos πy)`, solving `curl curl u − π² u = J` with
/// [`maxwell_sincos_current`].
pub fn maxwell_sincos_solution(p: Point) -> Point {
    [(PI * p[1]).sin(), (PI * p[0]).sin() * (PI * p[1]).cos()]
}

pub fn maxwell_sincos_current(p: Point) -> Point {
    [-PI * PI * (PI * p[1]).sin() * (PI * p[0]).cos(), 0.0]
}

/// `sin x sin y`, with `−Δ = 2 sin x sin y`.
pub fn sin_sin(p: Point) -> f64 {
    p[0].sin() * p[1].sin()
}

/// Quartic Gaussian `ψ = exp(−r⁴ / (2σ²))` around `center`, with
/// `r² = |x − center|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub center: Point,
    pub sigma: f64,
}

impl Pulse {
    pub fn new(center: Point, sigma: f64) -> Self {
        Self { center, sigma }
    }

    fn r2(&self, p: Point) -> (f64, f64, f64) {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        (dx, dy, dx * dx + dy * dy)
    }

    pub fn value(&self, p: Point) -> f64 {
        let (_, _, r2) = self.r2(p);
        (-r2 * r2 / (2.0 * self.sigma * self.sigma)).exp()
    }

    pub fn gradient(&self, p: Point) -> Point {
        let (dx, dy, r2) = self.r2(p);
        // ∂ψ = −2 r² ∂(r²) / (2σ²) ψ
        let f = -2.0 * r2 / (self.sigma * self.sigma) * self.value(p);
        [f * dx, f * dy]
    }

    /// Vector curl `(∂_y ψ, −∂_x ψ)`.
    pub fn curl(&self, p: Point) -> Point {
        let g = self.gradient(p);
        [g[1], -g[0]]
    }

    pub fn laplacian(&self, p: Point) -> f64 {
        // ψ = exp(−s²/(2σ²)) with s = r², |∇s|² = 4 r², Δs = 4
        let (_, _, s) = self.r2(p);
        let s2 = self.sigma * self.sigma;
        let psi = self.value(p);
        (s * s * 4.0 * s / (s2 * s2) - (4.0 * s + s * 4.0) / s2) * psi
    }
}

/// `J_z = ψ₀ − ψ₁` for two pulses of equal width.
pub fn dipole_current(p: Point, positive: Point, negative: Point, sigma: f64) -> f64 {
    Pulse::new(positive, sigma).value(p) - Pulse::new(negative, sigma).value(p)
}

/// `φ = exp(−τ²/(2σ²))` with `τ = a s² + b t² − 1`, `s = x̃ − ỹ`,
/// `t = x̃ + ỹ` and `(x̃, ỹ) = x − center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticRing {
    pub center: Point,
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
}

impl Default for EllipticRing {
    fn default() -> Self {
        Self { center: [1.5, 1.5], a: (1.0f64 / 1.7).powi(2), b: (1.0f64 / 1.1).powi(2), sigma: 0.11 }
    }
}

impl EllipticRing {
    fn tau(&self, p: Point) -> (f64, Point, f64) {
        let (x, y) = (p[0] - self.center[0], p[1] - self.center[1]);
        let (s, t) = (x - y, x + y);
        let tau = self.a * s * s + self.b * t * t - 1.0;
        let grad = [2.0 * self.a * s + 2.0 * self.b * t, -2.0 * self.a * s + 2.0 * self.b * t];
        (tau, grad, 4.0 * (self.a + self.b))
    }

    pub fn value(&self, p: Point) -> f64 {
        let (tau, _, _) = self.tau(p);
        (-tau * tau / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// `−Δφ`
    pub fn laplace_source(&self, p: Point) -> f64 {
        let (tau, g, lap) = self.tau(p);
        let g2 = g[0] * g[0] + g[1] * g[1];
        let s2 = self.sigma * self.sigma;
        -(tau * tau * g2 / (s2 * s2) - (tau * lap + g2) / s2) * self.value(p)
    }

    /// `J = φ curl τ`
    pub fn current(&self, p: Point) -> Point {
        let (_, g, _) = self.tau(p);
        let phi = self.value(p);
        [phi * g[1], -phi * g[0]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_laplacian(f: &dyn Fn(Point) -> f64, p: Point) -> f64 {
        let h = 1e-4;
        (f([p[0] + h, p[1]]) + f([p[0] - h, p[1]]) + f([p[0], p[1] + h]) + f([p[0], p[1] - h]) - 4.0 * f(p)) / (h * h)
    }

    #[test]
    fn pulse_derivatives_match_differences() {
        let ps = Pulse::new([0.5, 0.5], 0.05);
        let p = [0.62, 0.41];
        let h = 1e-6;
        let gx = (ps.value([p[0] + h, p[1]]) - ps.value([p[0] - h, p[1]])) / (2.0 * h);
        let gy = (ps.value([p[0], p[1] + h]) - ps.value([p[0], p[1] - h])) / (2.0 * h);
        let g = ps.gradient(p);
        assert!((g[0] - gx).abs() < 1e-6 && (g[1] - gy).abs() < 1e-6);
        let lap = fd_laplacian(&|q| ps.value(q), p);
        assert!((ps.laplacian(p) - lap).abs() < 1e-3 * lap.abs().max(1.0));
    }

    #[test]
    fn elliptic_source_matches_differences() {
        let e = EllipticRing::default();
        let p = [1.9, 1.2];
        let lap = fd_laplacian(&|q| e.value(q), p);
        assert!((e.laplace_source(p) + lap).abs() < 1e-3 * lap.abs().max(1.0));
    }

    #[test]
    fn maxwell_pair_is_consistent() {
        // curl curl u − π² u = J, by differences of the scalar curl
        let p = [0.3, 0.7];
        let h = 1e-4;
        let curl = |q: Point| {
            let dx = (maxwell_sincos_solution([q[0] + h, q[1]])[1] - maxwell_sincos_solution([q[0] - h, q[1]])[1]) / (2.0 * h);
            let dy = (maxwell_sincos_solution([q[0], q[1] + h])[0] - maxwell_sincos_solution([q[0], q[1] - h])[0]) / (2.0 * h);
            dx - dy
        };
        let cc = [
            (curl([p[0], p[1] + h]) - curl([p[0], p[1] - h])) / (2.0 * h),
            -(curl([p[0] + h, p[1]]) - curl([p[0] - h, p[1]])) / (2.0 * h),
        ];
        let u = maxwell_sincos_solution(p);
        let j = maxwell_sincos_current(p);
        for c in 0..2 {
            assert!((cc[c] - PI * PI * u[c] - j[c]).abs() < 1e-5);
        }
    }
}
