use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LinearOperator;

#[derive(Debug, Clone, Copy)]
pub struct PowerReport {
    /// Rayleigh quotient of the last iterate.
    pub value: f64,
    pub iterations: usize,
    /// `‖T x − λ x‖ / (|λ| ‖x‖)` in the supplied inner product.
    pub residual: f64,
    pub converged: bool,
}

/// Largest eigenvalue of an operator with nonnegative real spectrum that is
/// self-adjoint for `inner` (e.g. `M⁻¹K` with the `M` inner product).
///
/// Stops once the eigen-residual drops below `tol`; for a self-adjoint
/// operator that bounds the distance of the returned value to the spectrum.
/// The start vector is drawn from a fixed-seed generator so results are
/// reproducible.
pub fn power_method_spectral_radius(
    op: &dyn LinearOperator,
    inner: &dyn Fn(&[f64], &[f64]) -> f64,
    tol: f64,
    max_iter: usize,
) -> PowerReport {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; n];
    let mut report = PowerReport { value: 0.0, iterations: 0, residual: f64::INFINITY, converged: false };
    let nx = inner(&x, &x).sqrt();
    if nx == 0.0 {
        report.converged = true;
        report.residual = 0.0;
        return report;
    }
    x.iter_mut().for_each(|v| *v /= nx);
    for it in 1..=max_iter {
        op.apply(&x, &mut y);
        let lambda = inner(&x, &y);
        let ny = inner(&y, &y).sqrt();
        report.iterations = it;
        report.value = lambda;
        if ny == 0.0 {
            report.value = 0.0;
            report.residual = 0.0;
            report.converged = true;
            return report;
        }
        let r: Vec<f64> = y.iter().zip(&x).map(|(y, x)| y - lambda * x).collect();
        report.residual = inner(&r, &r).sqrt() / lambda.abs().max(f64::MIN_POSITIVE);
        if report.residual <= tol {
            report.converged = true;
            return report;
        }
        x.iter_mut().zip(&y).for_each(|(x, y)| *x = y / ny);
    }
    report
}
