use faer::Mat;

use crate::assembly::{assemble_hodge_laplace, curl_curl_pencil, Discretization};
use crate::derham::{BoundaryCondition, FemField, FormDegree};
use crate::linalg::{dense_generalized_symmetric_eig, numerical_rank};

use super::{SolverError, DENSE_LIMIT};

/// Eigenvalues below this are classified as zero.
pub const ZERO_TOL: f64 = 1e-8;

/// No eigenvalue may fall within this factor of the zero threshold.
pub const GAP_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenMode {
    /// The curl-curl pencil with the split mass on the right.
    CongaGeneralized,
    /// The stabilized ℓ=1 Hodge–Laplace pencil against `𝕄¹`. Its nonzero
    /// spectrum is the curl-curl one plus the grad-div one.
    HodgePenalized { alpha: f64 },
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Empty unless vectors were requested.
    pub eigenvectors: Vec<FemField>,
    pub zero_threshold: f64,
}

impl EigenResult {
    pub fn zero_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&v| v.abs() < self.zero_threshold).count()
    }

    pub fn nonzero(&self) -> &[f64] {
        &self.eigenvalues[self.zero_count()..]
    }
}

/// `|λ − λ_h| / max(λ, λ_h)`
pub fn relative_eigenvalue_error(exact: f64, computed: f64) -> f64 {
    (exact - computed).abs() / exact.abs().max(computed.abs())
}

fn check_gap(values: &[f64], tol: f64) -> Result<(), SolverError> {
    let lo = tol / GAP_FACTOR.sqrt();
    let hi = tol * GAP_FACTOR.sqrt();
    match values.iter().find(|v| (lo..hi).contains(&v.abs())) {
        Some(&value) => Err(SolverError::SpectralGap { tol, value }),
        None => Ok(()),
    }
}

fn check_dense(n: usize) -> Result<(), SolverError> {
    if n > DENSE_LIMIT {
        return Err(crate::linalg::LinalgError::TooLarge { dim: n, limit: DENSE_LIMIT }.into());
    }
    Ok(())
}

/// Dense curl-curl eigenproblem on `V¹`.
pub fn eig_curlcurl(
    d: &Discretization,
    bc: BoundaryCondition,
    mode: EigenMode,
    want_vectors: bool,
) -> Result<EigenResult, SolverError> {
    check_dense(d.dim(FormDegree::One))?;
    let (a, b) = match mode {
        EigenMode::CongaGeneralized => curl_curl_pencil(d, bc),
        EigenMode::HodgePenalized { alpha } => assemble_hodge_laplace(d, FormDegree::One, bc, alpha)?,
    };
    let eig = dense_generalized_symmetric_eig(a.as_ref(), b.as_ref(), want_vectors)?;
    let eigenvectors = match &eig.vectors {
        Some(v) => columns(d, v)?,
        None => Vec::new(),
    };
    Ok(EigenResult { eigenvalues: eig.values, eigenvectors, zero_threshold: ZERO_TOL })
}

fn columns(d: &Discretization, v: &Mat<f64>) -> Result<Vec<FemField>, SolverError> {
    (0..v.ncols())
        .map(|j| {
            let c: Vec<f64> = (0..v.nrows()).map(|i| v[(i, j)]).collect();
            Ok(FemField::new(d.complex.v1().clone(), c)?)
        })
        .collect()
}

/// Pieces of the predicted kernel dimension of the curl-curl pencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroSpacePrediction {
    /// `dim 𝔾 V^{0,c}`, the rank of `𝔾ℙ⁰`.
    pub gradients: usize,
    /// `dim (𝕀 − ℙ¹)V¹ = N¹ − rank ℙ¹`.
    pub jumps: usize,
    /// First Betti number of the domain; the harmonic fields of either
    /// boundary condition on a planar domain.
    pub harmonic: usize,
}

impl ZeroSpacePrediction {
    pub fn total(&self) -> usize {
        self.gradients + self.jumps + self.harmonic
    }
}

/// Kernel dimension from numerical ranks of the projection matrices.
pub fn predict_zero_eigenspace(d: &Discretization, bc: BoundaryCondition) -> Result<ZeroSpacePrediction, SolverError> {
    let n1 = d.dim(FormDegree::One);
    check_dense(n1)?;
    const RTOL: f64 = 1e-10;
    let gradients = numerical_rank(d.grad_conforming(bc).to_dense().as_ref(), RTOL)?;
    let rank_p1 = numerical_rank(d.p1(bc).to_dense().as_ref(), RTOL)?;
    let (_, b1) = d.complex.topology().betti_numbers();
    Ok(ZeroSpacePrediction { gradients, jumps: n1 - rank_p1, harmonic: b1 })
}

/// `𝕄¹`-orthonormal basis of discrete harmonic 1-forms.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub fields: Vec<FemField>,
    pub bc: BoundaryCondition,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Coefficients as columns, `N¹ × len`.
    pub fn matrix(&self) -> Mat<f64> {
        let n = self.fields.first().map_or(0, |f| f.coeffs().len());
        Mat::from_fn(n, self.len(), |i, j| self.fields[j].coeffs()[i])
    }
}

/// Kernel of the stabilized ℓ=1 Hodge–Laplace pencil.
pub fn harmonic_basis(
    d: &Discretization,
    bc: BoundaryCondition,
    alpha: f64,
    zero_tol: f64,
) -> Result<HarmonicBasis, SolverError> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(SolverError::Config(format!("harmonic basis needs α > 0, got {alpha}")));
    }
    check_dense(d.dim(FormDegree::One))?;
    let (l, m) = assemble_hodge_laplace(d, FormDegree::One, bc, alpha)?;
    let eig = dense_generalized_symmetric_eig(l.as_ref(), m.as_ref(), true)?;
    check_gap(&eig.values, zero_tol)?;
    let count = eig.values.iter().filter(|v| v.abs() < zero_tol).count();
    let v = eig.vectors.expect("vectors requested");
    let fields = columns(d, &v.subcols(0, count).to_owned())?;
    let p = d.p1(bc);
    let cp = d.curl_conforming(bc);
    for f in &fields {
        let x = f.coeffs();
        let norm = d.mass.norm(FormDegree::One, x);
        let jump: Vec<f64> = x.iter().zip(p.mul_vec(x)).map(|(a, b)| a - b).collect();
        let jn = d.mass.norm(FormDegree::One, &jump) / norm;
        if jn > 1e-10 {
            return Err(SolverError::Postcondition(format!("harmonic field jump {jn:.3e}")));
        }
        let cn = d.mass.norm(FormDegree::Two, &cp.mul_vec(x)) / norm;
        if cn > 1e-9 {
            return Err(SolverError::Postcondition(format!("harmonic field curl {cn:.3e}")));
        }
    }
    Ok(HarmonicBasis { fields, bc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_topology;
    use crate::linalg::dot;
    use std::sync::Arc;

    fn disc(name: &str, p: usize, n: usize) -> Discretization {
        Discretization::new(Arc::new(builtin_topology(name).unwrap()), p, n).unwrap()
    }

    #[test]
    fn relative_error_formula() {
        assert_eq!(relative_eigenvalue_error(2.0, 2.0), 0.0);
        assert_eq!(relative_eigenvalue_error(1.0, 2.0), 0.5);
        assert_eq!(relative_eigenvalue_error(2.0, 1.0), 0.5);
    }

    #[test]
    fn gap_detection() {
        assert!(check_gap(&[1e-14, 0.5], 1e-8).is_ok());
        assert!(check_gap(&[1e-14, 3e-8], 1e-8).is_err());
    }

    #[test]
    fn square_spectrum_low_resolution() {
        let d = disc("pi_square", 3, 6);
        let r = eig_curlcurl(&d, BoundaryCondition::Homogeneous, EigenMode::CongaGeneralized, false).unwrap();
        let exact = [1.0, 1.0, 2.0, 4.0, 4.0, 5.0];
        for (e, c) in exact.iter().zip(r.nonzero()) {
            assert!(relative_eigenvalue_error(*e, *c) < 1e-2, "{e} {c}");
        }
    }

    #[test]
    fn nonzero_modes_conform_on_split_square() {
        let d = disc("pi_square_2x2", 2, 3);
        let bc = BoundaryCondition::Homogeneous;
        let r = eig_curlcurl(&d, bc, EigenMode::CongaGeneralized, true).unwrap();
        let p = d.p1(bc);
        for (lam, f) in r.eigenvalues.iter().zip(&r.eigenvectors) {
            if *lam > r.zero_threshold {
                let x = f.coeffs();
                let jump: Vec<f64> = x.iter().zip(p.mul_vec(x)).map(|(a, b)| a - b).collect();
                assert!(d.mass.norm(FormDegree::One, &jump) <= 1e-9 * d.mass.norm(FormDegree::One, x));
            }
        }
        let pred = predict_zero_eigenspace(&d, bc).unwrap();
        assert_eq!(r.zero_count(), pred.total());
    }

    #[test]
    fn prediction_counts_four_patch_corner() {
        let d = disc("square_2x2", 3, 4);
        let bc = BoundaryCondition::Homogeneous;
        let pred = predict_zero_eigenspace(&d, bc).unwrap();
        // 11² interior nodes of the glued 13×13 spline grid
        assert_eq!(pred.gradients, 121);
        let r = eig_curlcurl(&d, bc, EigenMode::CongaGeneralized, false).unwrap();
        assert_eq!(r.zero_count(), pred.total());
    }

    #[test]
    fn annulus_has_one_harmonic_field() {
        let d = disc("annulus", 2, 3);
        let h = harmonic_basis(&d, BoundaryCondition::Inhomogeneous, 10.0, ZERO_TOL).unwrap();
        assert_eq!(h.len(), 1);
        let m = d.mass.matrix(FormDegree::One);
        let x = h.fields[0].coeffs();
        assert!((dot(x, &m.mul_vec(x)) - 1.0).abs() < 1e-10);
        let h = harmonic_basis(&d, BoundaryCondition::Homogeneous, 10.0, ZERO_TOL).unwrap();
        assert_eq!(h.len(), 1);
        let h = harmonic_basis(&disc("two_patch_square", 2, 3), BoundaryCondition::Inhomogeneous, 10.0, ZERO_TOL).unwrap();
        assert!(h.is_empty());
    }
}
