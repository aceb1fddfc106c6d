//! Univariate B-splines on open knot vectors: evaluation, Greville points,
//! derivative incidence and the collocation blocks of the commuting
//! interpolation operators.

use faer::Mat;

use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::quadrature::composite_gauss;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplineError {
    #[error("degree must be at least 1, got {0}")]
    Degree(usize),
    #[error("need at least one cell, got {0}")]
    Cells(usize),
    #[error("invalid knot vector: {0}")]
    Knots(String),
    #[error("evaluation point {0} outside [0, 1]")]
    Domain(f64),
    #[error("collocation matrix is singular (condition estimate {0:.3e})")]
    Singular(f64),
}

/// Open, symmetric knot vector on `[0, 1]` without repeated interior knots.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    /// Uniform interior knots.
    pub fn uniform(degree: usize, n_cells: usize) -> Result<Self, SplineError> {
        if degree < 1 {
            return Err(SplineError::Degree(degree));
        }
        if n_cells < 1 {
            return Err(SplineError::Cells(n_cells));
        }
        let mut knots = vec![0.0; degree + 1];
        // mirrored construction keeps ξ_i = 1 − ξ_{n+p−i} exact in floating point
        knots.extend((1..n_cells).map(|i| {
            if 2 * i <= n_cells {
                i as f64 / n_cells as f64
            } else {
                1.0 - (n_cells - i) as f64 / n_cells as f64
            }
        }));
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(degree, knots)
    }

    /// Validates openness, symmetry and strict monotonicity of the interior.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self, SplineError> {
        if degree < 1 {
            return Err(SplineError::Degree(degree));
        }
        let m = knots.len();
        if m < 2 * (degree + 1) {
            return Err(SplineError::Knots(format!("{m} knots cannot be open of degree {degree}")));
        }
        if knots[..=degree].iter().any(|&k| k != 0.0) || knots[m - degree - 1..].iter().any(|&k| k != 1.0) {
            return Err(SplineError::Knots("end knots must be repeated p+1 times at 0 and 1".into()));
        }
        let interior = &knots[degree..m - degree];
        if interior.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SplineError::Knots("interior knots must be strictly increasing in (0, 1)".into()));
        }
        for i in 0..m {
            if (knots[i] - (1.0 - knots[m - 1 - i])).abs() > 1e-14 {
                return Err(SplineError::Knots(format!("knot {i} breaks the symmetry")));
            }
        }
        Ok(Self { degree, knots })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of degree-`p` B-splines, `N + p`.
    pub fn n_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn n_cells(&self) -> usize {
        self.n_basis() - self.degree
    }

    /// Distinct knot values `0 = t_0 < … < t_N = 1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.knots[self.degree..self.knots.len() - self.degree].to_vec()
    }

    /// Knot span `i` with `ξ_i ≤ x < ξ_{i+1}`; the last span is closed at 1.
    pub fn find_span(&self, x: f64) -> usize {
        let p = self.degree;
        let n = self.n_basis();
        if x >= self.knots[n] {
            return n - 1;
        }
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if x < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Degree-`d` B-splines on this knot sequence that are nonzero in `span`:
    /// returns `N^d_{span-d..=span}(x)`.
    fn raw_basis(&self, span: usize, d: usize, x: f64) -> Vec<f64> {
        let u = &self.knots;
        let mut n = vec![0.0; d + 1];
        let mut left = vec![0.0; d + 1];
        let mut right = vec![0.0; d + 1];
        n[0] = 1.0;
        for j in 1..=d {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }
}

/// Which family of a [`KnotVector`] a space uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Normalized B-splines of degree `p`.
    NSpline,
    /// Curry–Schoenberg splines of degree `p − 1`, normalized to unit integral.
    MSpline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSplineSpace {
    knots: KnotVector,
    kind: BasisKind,
}

impl UnivariateSplineSpace {
    pub fn new(knots: KnotVector, kind: BasisKind) -> Self {
        Self { knots, kind }
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            BasisKind::NSpline => self.knots.n_basis(),
            BasisKind::MSpline => self.knots.n_basis() - 1,
        }
    }

    /// Polynomial degree of the basis functions.
    pub fn degree(&self) -> usize {
        match self.kind {
            BasisKind::NSpline => self.knots.degree,
            BasisKind::MSpline => self.knots.degree - 1,
        }
    }

    /// Index of the first nonzero basis function at `x` and the values of
    /// the `degree + 1` functions starting there.
    pub fn eval_basis(&self, x: f64) -> Result<(usize, Vec<f64>), SplineError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(SplineError::Domain(x));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> (usize, Vec<f64>) {
        let kv = &self.knots;
        let p = kv.degree;
        let span = kv.find_span(x);
        match self.kind {
            BasisKind::NSpline => (span - p, kv.raw_basis(span, p, x)),
            BasisKind::MSpline => {
                let mut vals = kv.raw_basis(span, p - 1, x);
                let first = span - p;
                for (r, v) in vals.iter_mut().enumerate() {
                    let k = first + r + 1;
                    *v *= p as f64 / (kv.knots[k + p] - kv.knots[k]);
                }
                (first, vals)
            }
        }
    }

    /// Values of all basis functions at `x` (dense).
    pub fn eval_all(&self, x: f64) -> Result<Vec<f64>, SplineError> {
        let (first, vals) = self.eval_basis(x)?;
        let mut out = vec![0.0; self.dim()];
        out[first..first + vals.len()].copy_from_slice(&vals);
        Ok(out)
    }

    /// Evaluates the spline with coefficient vector `coeffs` at `x`.
    pub fn eval_spline(&self, coeffs: &[f64], x: f64) -> Result<f64, SplineError> {
        assert_eq!(coeffs.len(), self.dim(), "coefficient vector length");
        let (first, vals) = self.eval_basis(x)?;
        Ok(vals.iter().enumerate().map(|(r, v)| v * coeffs[first + r]).sum())
    }
}

/// Greville abscissae, the interpolation nodes of the primal projections.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationGrid {
    points: Vec<f64>,
}

impl InterpolationGrid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `ζ_i = (ξ_{i+1} + … + ξ_{i+p}) / p`; averages are taken symmetrically so
/// the grid inherits the knot symmetry exactly.
pub fn greville_points(kv: &KnotVector) -> InterpolationGrid {
    let p = kv.degree;
    let n = kv.n_basis();
    let mut points: Vec<f64> = (0..n).map(|i| kv.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64).collect();
    points[0] = 0.0;
    points[n - 1] = 1.0;
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let b = 1.0 - 0.5 * (points[i] + 1.0 - points[j]);
        points[i] = 1.0 - b;
        points[j] = b;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.5;
    }
    InterpolationGrid { points }
}

/// Collocation matrix `(i, j) ↦ 𝒩_j(ζ_i)`.
pub fn interpolation_matrix(space: &UnivariateSplineSpace, grid: &InterpolationGrid) -> Result<Mat<f64>, SplineError> {
    assert_eq!(space.kind(), BasisKind::NSpline, "interpolation uses the N-spline family");
    assert_eq!(grid.len(), space.dim(), "grid size must match the space dimension");
    let n = space.dim();
    let mut m = Mat::zeros(n, n);
    for (i, &z) in grid.points.iter().enumerate() {
        let (first, vals) = space.eval_basis(z)?;
        for (r, v) in vals.into_iter().enumerate() {
            m[(i, first + r)] = v;
        }
    }
    check_nonsingular(&m)?;
    Ok(m)
}

/// Histopolation matrix `(i, j) ↦ ∫_{ζ_i}^{ζ_{i+1}} 𝒟_j`, integrated with
/// `p + 1` Gauss points on every knot span inside each grid interval.
pub fn histopolation_matrix(space: &UnivariateSplineSpace, grid: &InterpolationGrid) -> Result<Mat<f64>, SplineError> {
    assert_eq!(space.kind(), BasisKind::MSpline, "histopolation uses the M-spline family");
    assert_eq!(grid.len(), space.dim() + 1, "grid must have one more node than the space dimension");
    let n = space.dim();
    let kv = space.knots();
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        let breaks = segment_breaks(kv, grid.points[i], grid.points[i + 1]);
        let (xs, ws) = composite_gauss(&breaks, kv.degree + 1);
        for (x, w) in xs.into_iter().zip(ws) {
            let (first, vals) = space.eval_unchecked(x);
            for (r, v) in vals.into_iter().enumerate() {
                m[(i, first + r)] += w * v;
            }
        }
    }
    check_nonsingular(&m)?;
    Ok(m)
}

/// `[a, b]` split at the knots it contains.
pub(crate) fn segment_breaks(kv: &KnotVector, a: f64, b: f64) -> Vec<f64> {
    let mut breaks = vec![a];
    breaks.extend(kv.breakpoints().into_iter().filter(|&t| t > a && t < b));
    breaks.push(b);
    breaks
}

fn check_nonsingular(m: &Mat<f64>) -> Result<(), SplineError> {
    let s = m.singular_values().map_err(|_| SplineError::Singular(f64::INFINITY))?;
    let (max, min) = (s[0], *s.last().unwrap());
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if cond.is_nan() || cond >= 1e12 {
        return Err(SplineError::Singular(cond));
    }
    Ok(())
}

/// Bidiagonal `(n−1)×n` matrix mapping N-spline coefficients to the
/// M-spline coefficients of the derivative.
pub fn univariate_incidence(kv: &KnotVector) -> SparseMatrix {
    let n = kv.n_basis();
    let mut t = TripletBuilder::with_capacity(n - 1, n, 2 * (n - 1));
    for i in 0..n - 1 {
        t.push(i, i, -1.0);
        t.push(i, i + 1, 1.0);
    }
    t.build()
}
