use std::ops::Range;
use std::sync::Arc;

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use crate::bspline::{
    greville_points, histopolation_matrix, interpolation_matrix, BasisKind, InterpolationGrid, KnotVector,
    UnivariateSplineSpace,
};
use crate::geometry::MultipatchTopology;

use super::DerhamError;

/// Form degree of a space in the grad–curl sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormDegree {
    Zero,
    One,
    Two,
}

impl FormDegree {
    pub fn index(self) -> usize {
        match self {
            FormDegree::Zero => 0,
            FormDegree::One => 1,
            FormDegree::Two => 2,
        }
    }
}

/// Tensor factor kinds `(x̂, ŷ)` of one vector component.
pub type ComponentKinds = (BasisKind, BasisKind);

/// Broken tensor-spline space of one form degree over all patches.
///
/// Flat indices are patch-contiguous; inside a patch, components follow each
/// other and a component coefficient `(i, j)` sits at `i * ny + j` with `i`
/// the `x̂` index.
#[derive(Debug, Clone)]
pub struct BrokenFemSpace {
    form: FormDegree,
    knots: KnotVector,
    topology: Arc<MultipatchTopology>,
}

impl BrokenFemSpace {
    pub fn form(&self) -> FormDegree {
        self.form
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn topology(&self) -> &Arc<MultipatchTopology> {
        &self.topology
    }

    pub fn degree(&self) -> usize {
        self.knots.degree()
    }

    pub fn n_patches(&self) -> usize {
        self.topology.n_patches()
    }

    pub fn components(&self) -> &'static [ComponentKinds] {
        use BasisKind::{MSpline as M, NSpline as N};
        match self.form {
            FormDegree::Zero => &[(N, N)],
            FormDegree::One => &[(M, N), (N, M)],
            FormDegree::Two => &[(M, M)],
        }
    }

    fn len_of(&self, kind: BasisKind) -> usize {
        match kind {
            BasisKind::NSpline => self.knots.n_basis(),
            BasisKind::MSpline => self.knots.n_basis() - 1,
        }
    }

    /// `(nx, ny)` of component `c`.
    pub fn component_shape(&self, c: usize) -> (usize, usize) {
        let (kx, ky) = self.components()[c];
        (self.len_of(kx), self.len_of(ky))
    }

    /// Offset of component `c` inside a patch block.
    pub fn component_offset(&self, c: usize) -> usize {
        (0..c).map(|d| {
            let (a, b) = self.component_shape(d);
            a * b
        }).sum()
    }

    pub fn patch_dim(&self) -> usize {
        (0..self.components().len()).map(|c| {
            let (a, b) = self.component_shape(c);
            a * b
        }).sum()
    }

    pub fn dim(&self) -> usize {
        self.n_patches() * self.patch_dim()
    }

    pub fn patch_range(&self, k: usize) -> Range<usize> {
        let d = self.patch_dim();
        k * d..(k + 1) * d
    }

    pub fn patch_ranges(&self) -> Vec<Range<usize>> {
        (0..self.n_patches()).map(|k| self.patch_range(k)).collect()
    }

    pub fn index(&self, patch: usize, comp: usize, i: usize, j: usize) -> usize {
        let (nx, ny) = self.component_shape(comp);
        debug_assert!(i < nx && j < ny);
        patch * self.patch_dim() + self.component_offset(comp) + i * ny + j
    }

    /// Inverse of [`Self::index`].
    pub fn multi_index(&self, flat: usize) -> (usize, usize, usize, usize) {
        let d = self.patch_dim();
        let (patch, mut r) = (flat / d, flat % d);
        for c in 0..self.components().len() {
            let (nx, ny) = self.component_shape(c);
            if r < nx * ny {
                return (patch, c, r / ny, r % ny);
            }
            r -= nx * ny;
        }
        unreachable!("flat index {flat} out of range")
    }

    pub fn patch_of(&self, flat: usize) -> usize {
        flat / self.patch_dim()
    }
}

/// Coefficients of a field in the primal B-spline basis of a space.
#[derive(Debug, Clone)]
pub struct FemField {
    space: BrokenFemSpace,
    coeffs: Vec<f64>,
}

impl FemField {
    pub fn new(space: BrokenFemSpace, coeffs: Vec<f64>) -> Result<Self, DerhamError> {
        if coeffs.len() != space.dim() {
            return Err(DerhamError::Length { expected: space.dim(), got: coeffs.len() });
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: BrokenFemSpace) -> Self {
        let n = space.dim();
        Self { space, coeffs: vec![0.0; n] }
    }

    pub fn space(&self) -> &BrokenFemSpace {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }
}

/// The three broken spaces plus the univariate data shared by all patches.
#[derive(Debug, Clone)]
pub struct DeRhamComplex {
    topology: Arc<MultipatchTopology>,
    knots: KnotVector,
    grid: InterpolationGrid,
    spaces: [BrokenFemSpace; 3],
    nspace: UnivariateSplineSpace,
    mspace: UnivariateSplineSpace,
    interp: Mat<f64>,
    histop: Mat<f64>,
    interp_inv: Mat<f64>,
    histop_inv: Mat<f64>,
}

/// `(V⁰_h, V¹_h, V²_h)` on `topology` with degree `p` and `n_cells` cells per
/// patch direction.
pub fn build_spaces(
    topology: Arc<MultipatchTopology>,
    p: usize,
    n_cells: usize,
) -> Result<(BrokenFemSpace, BrokenFemSpace, BrokenFemSpace), DerhamError> {
    if p < 1 {
        return Err(DerhamError::Config(format!("degree must be at least 1, got {p}")));
    }
    if n_cells < 1 {
        return Err(DerhamError::Config(format!("need at least one cell, got {n_cells}")));
    }
    let knots = KnotVector::uniform(p, n_cells)?;
    let mk = |form| BrokenFemSpace { form, knots: knots.clone(), topology: topology.clone() };
    Ok((mk(FormDegree::Zero), mk(FormDegree::One), mk(FormDegree::Two)))
}

impl DeRhamComplex {
    pub fn new(topology: Arc<MultipatchTopology>, p: usize, n_cells: usize) -> Result<Self, DerhamError> {
        let (v0, v1, v2) = build_spaces(topology.clone(), p, n_cells)?;
        let knots = v0.knots().clone();
        let grid = greville_points(&knots);
        let nspace = UnivariateSplineSpace::new(knots.clone(), BasisKind::NSpline);
        let mspace = UnivariateSplineSpace::new(knots.clone(), BasisKind::MSpline);
        let interp = interpolation_matrix(&nspace, &grid)?;
        let histop = histopolation_matrix(&mspace, &grid)?;
        let interp_inv = interp.partial_piv_lu().inverse();
        let histop_inv = histop.partial_piv_lu().inverse();
        Ok(Self { topology, knots, grid, spaces: [v0, v1, v2], nspace, mspace, interp, histop, interp_inv, histop_inv })
    }

    pub fn topology(&self) -> &Arc<MultipatchTopology> {
        &self.topology
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.knots.degree()
    }

    pub fn n_cells(&self) -> usize {
        self.knots.n_cells()
    }

    pub fn grid(&self) -> &InterpolationGrid {
        &self.grid
    }

    pub fn space(&self, form: FormDegree) -> &BrokenFemSpace {
        &self.spaces[form.index()]
    }

    pub fn v0(&self) -> &BrokenFemSpace {
        &self.spaces[0]
    }

    pub fn v1(&self) -> &BrokenFemSpace {
        &self.spaces[1]
    }

    pub fn v2(&self) -> &BrokenFemSpace {
        &self.spaces[2]
    }

    pub fn univariate(&self, kind: BasisKind) -> &UnivariateSplineSpace {
        match kind {
            BasisKind::NSpline => &self.nspace,
            BasisKind::MSpline => &self.mspace,
        }
    }

    /// Univariate collocation block of a factor kind: interpolation for N,
    /// histopolation for M.
    pub fn collocation(&self, kind: BasisKind) -> &Mat<f64> {
        match kind {
            BasisKind::NSpline => &self.interp,
            BasisKind::MSpline => &self.histop,
        }
    }

    pub fn collocation_inverse(&self, kind: BasisKind) -> &Mat<f64> {
        match kind {
            BasisKind::NSpline => &self.interp_inv,
            BasisKind::MSpline => &self.histop_inv,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_topology;

    fn topo(name: &str) -> Arc<MultipatchTopology> {
        Arc::new(builtin_topology(name).unwrap())
    }

    #[test]
    fn dimensions_single_patch() {
        let (v0, v1, v2) = build_spaces(topo("unit_square"), 2, 2).unwrap();
        assert_eq!((v0.dim(), v1.dim(), v2.dim()), (16, 24, 9));
    }

    #[test]
    fn dimensions_double_with_patches() {
        let (v0, v1, v2) = build_spaces(topo("two_patch_square"), 2, 2).unwrap();
        assert_eq!((v0.dim(), v1.dim(), v2.dim()), (32, 48, 18));
    }

    #[test]
    fn dimensions_annulus() {
        let (v0, v1, v2) = build_spaces(topo("annulus"), 3, 4).unwrap();
        assert_eq!(v0.dim(), 196);
        assert_eq!(v1.dim(), 4 * 2 * 7 * 6);
        assert_eq!(v2.dim(), 4 * 36);
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(build_spaces(topo("unit_square"), 0, 2), Err(DerhamError::Config(_))));
        assert!(matches!(build_spaces(topo("unit_square"), 2, 0), Err(DerhamError::Config(_))));
    }

    #[test]
    fn index_round_trip_and_patch_contiguity() {
        let (_, v1, _) = build_spaces(topo("annulus"), 2, 3).unwrap();
        for flat in 0..v1.dim() {
            let (k, c, i, j) = v1.multi_index(flat);
            assert_eq!(v1.index(k, c, i, j), flat);
            assert!(v1.patch_range(k).contains(&flat));
        }
    }

    #[test]
    fn field_length_is_checked() {
        let (v0, _, _) = build_spaces(topo("unit_square"), 2, 2).unwrap();
        assert!(FemField::new(v0.clone(), vec![0.0; 3]).is_err());
        assert_eq!(FemField::zeros(v0).coeffs().len(), 16);
    }
}
