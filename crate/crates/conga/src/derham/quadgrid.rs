use crate::bspline::BasisKind;
use crate::quadrature::gauss_legendre_on;

use super::space::DeRhamComplex;

/// Tensor Gauss grid on the reference patch with `q` points per cell and
/// direction, together with the univariate basis values at its nodes.
///
/// At every node of cell `c` the nonzero N-splines are `c..=c+p` and the
/// nonzero M-splines `c..c+p`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    q: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    nvals: Vec<Vec<f64>>,
    mvals: Vec<Vec<f64>>,
}

impl QuadratureGrid {
    pub fn new(complex: &DeRhamComplex, q: usize) -> Self {
        let br = complex.knots().breakpoints();
        let (mut points, mut weights) = (Vec::new(), Vec::new());
        for w in br.windows(2) {
            let (x, ws) = gauss_legendre_on(w[0], w[1], q);
            points.extend(x);
            weights.extend(ws);
        }
        let eval = |kind: BasisKind| -> Vec<Vec<f64>> {
            let sp = complex.univariate(kind);
            points
                .iter()
                .enumerate()
                .map(|(idx, &x)| {
                    let (first, vals) = sp.eval_unchecked(x);
                    debug_assert_eq!(first, idx / q);
                    vals
                })
                .collect()
        };
        let nvals = eval(BasisKind::NSpline);
        let mvals = eval(BasisKind::MSpline);
        Self { q, points, weights, nvals, mvals }
    }

    pub fn points_per_cell(&self) -> usize {
        self.q
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cell containing node `idx`, which is also the first active basis index.
    pub fn cell(&self, idx: usize) -> usize {
        idx / self.q
    }

    pub fn values(&self, kind: BasisKind, idx: usize) -> &[f64] {
        match kind {
            BasisKind::NSpline => &self.nvals[idx],
            BasisKind::MSpline => &self.mvals[idx],
        }
    }
}
