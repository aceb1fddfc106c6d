//! Geometric degrees of freedom and the primal commuting projections.

use faer::Mat;

use crate::bspline::{segment_breaks, BasisKind};
use crate::geometry::{mat_t_vec, Point};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::quadrature::composite_gauss;

use super::space::{BrokenFemSpace, DeRhamComplex, FemField, FormDegree};
use super::DerhamError;

/// A physical field handed to the projection operators.
#[derive(Clone, Copy)]
pub enum Field<'a> {
    Scalar(&'a dyn Fn(Point) -> f64),
    Vector(&'a dyn Fn(Point) -> Point),
}

impl Field<'_> {
    pub(crate) fn scalar(&self) -> Result<&dyn Fn(Point) -> f64, DerhamError> {
        match self {
            Field::Scalar(f) => Ok(*f),
            Field::Vector(_) => Err(DerhamError::FieldKind("a scalar field")),
        }
    }

    pub(crate) fn vector(&self) -> Result<&dyn Fn(Point) -> Point, DerhamError> {
        match self {
            Field::Vector(f) => Ok(*f),
            Field::Scalar(_) => Err(DerhamError::FieldKind("a vector field")),
        }
    }
}

/// Gauss points per knot-span segment used for edge and cell integrals.
pub fn default_dof_points(p: usize) -> usize {
    p + 1
}

/// Geometric DoFs `σ^ℓ(v)`: point values at mapped Greville nodes (ℓ=0),
/// tangential integrals along mapped grid edges (ℓ=1), integrals over mapped
/// grid cells (ℓ=2). Edge and cell integrals are pulled back to the
/// reference patch and use `n_points` Gauss points per knot-span segment.
pub fn geometric_dofs(
    complex: &DeRhamComplex,
    form: FormDegree,
    field: Field<'_>,
    n_points: usize,
) -> Result<Vec<f64>, DerhamError> {
    let space = complex.space(form);
    let z = complex.grid().points();
    let n = z.len();
    let kv = complex.knots();
    let segs: Vec<(Vec<f64>, Vec<f64>)> =
        (0..n - 1).map(|i| composite_gauss(&segment_breaks(kv, z[i], z[i + 1]), n_points)).collect();
    let mut sigma = vec![0.0; space.dim()];
    for k in 0..space.n_patches() {
        let map = complex.topology().patch(k);
        match form {
            FormDegree::Zero => {
                let f = field.scalar()?;
                for i in 0..n {
                    for j in 0..n {
                        sigma[space.index(k, 0, i, j)] = f(map.map([z[i], z[j]]));
                    }
                }
            }
            FormDegree::One => {
                let f = field.vector()?;
                // component 0: edges along x̂
                for (i, (xs, ws)) in segs.iter().enumerate() {
                    for j in 0..n {
                        let mut s = 0.0;
                        for (&x, &w) in xs.iter().zip(ws) {
                            let pt = [x, z[j]];
                            let v = f(map.map(pt));
                            s += w * mat_t_vec(&map.jacobian(pt), v)[0];
                        }
                        sigma[space.index(k, 0, i, j)] = s;
                    }
                }
                for i in 0..n {
                    for (j, (ys, ws)) in segs.iter().enumerate() {
                        let mut s = 0.0;
                        for (&y, &w) in ys.iter().zip(ws) {
                            let pt = [z[i], y];
                            let v = f(map.map(pt));
                            s += w * mat_t_vec(&map.jacobian(pt), v)[1];
                        }
                        sigma[space.index(k, 1, i, j)] = s;
                    }
                }
            }
            FormDegree::Two => {
                let f = field.scalar()?;
                for (i, (xs, wx)) in segs.iter().enumerate() {
                    for (j, (ys, wy)) in segs.iter().enumerate() {
                        let mut s = 0.0;
                        for (&x, &a) in xs.iter().zip(wx) {
                            for (&y, &b) in ys.iter().zip(wy) {
                                let pt = [x, y];
                                let det = crate::geometry::det2(&map.jacobian(pt));
                                s += a * b * f(map.map(pt)) * det;
                            }
                        }
                        sigma[space.index(k, 0, i, j)] = s;
                    }
                }
            }
        }
    }
    Ok(sigma)
}

/// Applies the patch-diagonal inverse collocation `𝕂⁻¹` to a DoF vector.
pub fn collocation_solve(complex: &DeRhamComplex, space: &BrokenFemSpace, sigma: &[f64]) -> Vec<f64> {
    kron_apply(complex, space, sigma, true)
}

/// Applies `𝕂` to a coefficient vector (the DoFs of the corresponding spline).
pub fn collocation_apply(complex: &DeRhamComplex, space: &BrokenFemSpace, coeffs: &[f64]) -> Vec<f64> {
    kron_apply(complex, space, coeffs, false)
}

fn kron_apply(complex: &DeRhamComplex, space: &BrokenFemSpace, x: &[f64], inverse: bool) -> Vec<f64> {
    assert_eq!(x.len(), space.dim(), "vector length must match the space");
    let pick = |kind: BasisKind| if inverse { complex.collocation_inverse(kind) } else { complex.collocation(kind) };
    let mut out = vec![0.0; x.len()];
    for k in 0..space.n_patches() {
        for (c, &(kx, ky)) in space.components().iter().enumerate() {
            let (nx, ny) = space.component_shape(c);
            let base = space.index(k, c, 0, 0);
            if x[base..base + nx * ny].iter().all(|&v| v == 0.0) {
                continue;
            }
            let s = Mat::from_fn(nx, ny, |i, j| x[base + i * ny + j]);
            let r = pick(kx) * &s * pick(ky).transpose();
            for i in 0..nx {
                for j in 0..ny {
                    out[base + i * ny + j] = r[(i, j)];
                }
            }
        }
    }
    out
}

/// Sparse block-diagonal collocation matrix `𝕂^ℓ`.
pub fn collocation_matrix(complex: &DeRhamComplex, form: FormDegree) -> SparseMatrix {
    let space = complex.space(form);
    let mut t = TripletBuilder::new(space.dim(), space.dim());
    for k in 0..space.n_patches() {
        for (c, &(kx, ky)) in space.components().iter().enumerate() {
            let (ax, ay) = (complex.collocation(kx), complex.collocation(ky));
            let (nx, ny) = space.component_shape(c);
            let base = space.index(k, c, 0, 0);
            for i in 0..nx {
                for a in 0..nx {
                    let u = ax[(i, a)];
                    if u == 0.0 {
                        continue;
                    }
                    for j in 0..ny {
                        for b in 0..ny {
                            let w = ay[(j, b)];
                            if w != 0.0 {
                                t.push(base + i * ny + j, base + a * ny + b, u * w);
                            }
                        }
                    }
                }
            }
        }
    }
    t.build()
}

/// Primal commuting projection `Π^ℓ v` with coefficients `𝕂⁻¹ σ^ℓ(v)`.
pub fn primal_projection(
    complex: &DeRhamComplex,
    form: FormDegree,
    field: Field<'_>,
    n_points: usize,
) -> Result<FemField, DerhamError> {
    let sigma = geometric_dofs(complex, form, field, n_points)?;
    let space = complex.space(form).clone();
    let coeffs = collocation_solve(complex, &space, &sigma);
    FemField::new(space, coeffs)
}
