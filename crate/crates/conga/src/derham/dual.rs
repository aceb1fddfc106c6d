//! Moments against the primal basis and the dual commuting projections.

use crate::bspline::BasisKind;
use crate::geometry::{det2, mat_inv_t_vec, mat_inv_vec, Point};
use crate::linalg::SparseMatrix;

use super::dofs::Field;
use super::quadgrid::QuadratureGrid;
use super::space::{DeRhamComplex, FemField, FormDegree};
use super::DerhamError;

/// Moments `m_i = ⟨v, Λ_i⟩` of a physical field against the pushed-forward
/// basis of the space, by patchwise Gauss quadrature.
pub fn moments(
    complex: &DeRhamComplex,
    form: FormDegree,
    field: Field<'_>,
    quad: &QuadratureGrid,
) -> Result<Vec<f64>, DerhamError> {
    let space = complex.space(form);
    let mut out = vec![0.0; space.dim()];
    let np = quad.n_points();
    let (x, w) = (quad.points(), quad.weights());
    for k in 0..space.n_patches() {
        let map = complex.topology().patch(k);
        for a in 0..np {
            for b in 0..np {
                let pt = [x[a], x[b]];
                let jac = map.jacobian(pt);
                let det = det2(&jac);
                let ww = w[a] * w[b];
                // reference integrand per component
                let vals: [f64; 2] = match form {
                    FormDegree::Zero => [field.scalar()?(map.map(pt)) * det, 0.0],
                    FormDegree::One => {
                        let h = mat_inv_vec(&jac, field.vector()?(map.map(pt)));
                        [h[0] * det, h[1] * det]
                    }
                    FormDegree::Two => [field.scalar()?(map.map(pt)), 0.0],
                };
                for (c, &(kx, ky)) in space.components().iter().enumerate() {
                    let g = ww * vals[c];
                    if g == 0.0 {
                        continue;
                    }
                    let (bx, by) = (quad.values(kx, a), quad.values(ky, b));
                    let (ca, cb) = (quad.cell(a), quad.cell(b));
                    for (r, vx) in bx.iter().enumerate() {
                        let base = space.index(k, c, ca + r, cb);
                        for (s, vy) in by.iter().enumerate() {
                            out[base + s] += g * vx * vy;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Dual-basis coefficients `ℙᵀ m` of the dual commuting projection. A mass
/// solve turns them into primal coefficients.
pub fn dual_projection_coeffs(
    complex: &DeRhamComplex,
    form: FormDegree,
    projection: &SparseMatrix,
    field: Field<'_>,
    quad: &QuadratureGrid,
) -> Result<Vec<f64>, DerhamError> {
    let m = moments(complex, form, field, quad)?;
    if projection.shape() != (m.len(), m.len()) {
        return Err(DerhamError::Length { expected: m.len(), got: projection.nrows() });
    }
    Ok(projection.tr_mul_vec(&m))
}

/// Value of a field at reference point `x̂` of patch `k`. Vector fields are
/// returned in physical components; scalar ones in the first slot.
pub fn evaluate_field(complex: &DeRhamComplex, field: &FemField, k: usize, xh: Point) -> Point {
    let space = field.space();
    let c = field.coeffs();
    let nsp = complex.univariate(BasisKind::NSpline);
    let msp = complex.univariate(BasisKind::MSpline);
    let (nx0, nxv) = nsp.eval_unchecked(xh[0]);
    let (ny0, nyv) = nsp.eval_unchecked(xh[1]);
    let (mx0, mxv) = msp.eval_unchecked(xh[0]);
    let (my0, myv) = msp.eval_unchecked(xh[1]);
    let sum = |comp: usize, x0: usize, xv: &[f64], y0: usize, yv: &[f64]| -> f64 {
        let mut s = 0.0;
        for (r, a) in xv.iter().enumerate() {
            let base = space.index(k, comp, x0 + r, y0);
            for (t, b) in yv.iter().enumerate() {
                s += a * b * c[base + t];
            }
        }
        s
    };
    let map = complex.topology().patch(k);
    match space.form() {
        FormDegree::Zero => [sum(0, nx0, &nxv, ny0, &nyv), 0.0],
        FormDegree::One => {
            let b = [sum(0, mx0, &mxv, ny0, &nyv), sum(1, nx0, &nxv, my0, &myv)];
            mat_inv_t_vec(&map.jacobian(xh), b)
        }
        FormDegree::Two => [sum(0, mx0, &mxv, my0, &myv) / det2(&map.jacobian(xh)), 0.0],
    }
}
