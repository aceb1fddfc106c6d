//! Conforming projections obtained by averaging interface DoFs.

use std::collections::BTreeMap;

use crate::geometry::{Corner, Edge};
use crate::linalg::{SparseMatrix, TripletBuilder};

use super::dofs::{collocation_apply, collocation_solve};
use super::space::{BrokenFemSpace, DeRhamComplex, FormDegree};
use super::DerhamError;

/// Whether boundary DoFs are kept or set to zero by the projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Homogeneous,
    Inhomogeneous,
}

/// Signed union-find over flat DoF indices.
struct SignedClasses {
    parent: Vec<usize>,
    /// sign of a node relative to its parent
    sign: Vec<f64>,
}

impl SignedClasses {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), sign: vec![1.0; n] }
    }

    fn find(&mut self, a: usize) -> (usize, f64) {
        let p = self.parent[a];
        if p == a {
            return (a, 1.0);
        }
        let (root, s) = self.find(p);
        self.parent[a] = root;
        self.sign[a] *= s;
        (root, self.sign[a])
    }

    /// Records `dof a = eps · dof b`.
    fn union(&mut self, a: usize, b: usize, eps: f64) -> Result<(), DerhamError> {
        let (ra, sa) = self.find(a);
        let (rb, sb) = self.find(b);
        if ra == rb {
            if sa != eps * sb {
                return Err(DerhamError::Consistency(format!(
                    "DoFs {a} and {b} are identified with opposite orientations"
                )));
            }
            return Ok(());
        }
        self.parent[ra] = rb;
        self.sign[ra] = eps * sb * sa;
        Ok(())
    }
}

/// DoFs attached to a patch edge, ordered by the edge parameter.
fn edge_dofs(space: &BrokenFemSpace, k: usize, e: Edge) -> Vec<usize> {
    let n = space.knots().n_basis();
    match space.form() {
        FormDegree::Zero => (0..n)
            .map(|t| match e {
                Edge::South => space.index(k, 0, t, 0),
                Edge::North => space.index(k, 0, t, n - 1),
                Edge::West => space.index(k, 0, 0, t),
                Edge::East => space.index(k, 0, n - 1, t),
            })
            .collect(),
        FormDegree::One => (0..n - 1)
            .map(|t| match e {
                Edge::South => space.index(k, 0, t, 0),
                Edge::North => space.index(k, 0, t, n - 1),
                Edge::West => space.index(k, 1, 0, t),
                Edge::East => space.index(k, 1, n - 1, t),
            })
            .collect(),
        FormDegree::Two => Vec::new(),
    }
}

fn corner_dof(space: &BrokenFemSpace, k: usize, c: Corner) -> usize {
    let n = space.knots().n_basis();
    let (a, b) = c.unit();
    space.index(k, 0, a * (n - 1), b * (n - 1))
}

/// Members with signs, and whether the class touches the boundary.
pub(crate) type DofClass = (Vec<(usize, f64)>, bool);

/// Equivalence classes of geometric DoFs.
pub(crate) fn dof_classes(space: &BrokenFemSpace) -> Result<Vec<DofClass>, DerhamError> {
    let topo = space.topology();
    let mut uf = SignedClasses::new(space.dim());
    for rec in topo.interfaces() {
        let (k, l) = rec.patches;
        let a = edge_dofs(space, k, rec.edges.0);
        let mut b = edge_dofs(space, l, rec.edges.1);
        if a.len() != b.len() {
            return Err(DerhamError::Consistency(format!("interface {k}-{l} has mismatched DoF counts")));
        }
        if rec.reversed {
            b.reverse();
        }
        let eps = if space.form() == FormDegree::One { rec.sign } else { 1.0 };
        for (&x, &y) in a.iter().zip(&b) {
            uf.union(x, y, eps)?;
        }
    }
    if space.form() == FormDegree::Zero {
        for class in topo.vertex_classes() {
            let (k0, c0) = class[0];
            for &(k, c) in &class[1..] {
                uf.union(corner_dof(space, k, c), corner_dof(space, k0, c0), 1.0)?;
            }
        }
    }
    let mut on_boundary = vec![false; space.dim()];
    for &(k, e) in topo.boundary_edges() {
        for d in edge_dofs(space, k, e) {
            on_boundary[d] = true;
        }
    }
    let mut classes: BTreeMap<usize, DofClass> = BTreeMap::new();
    for (d, &b) in on_boundary.iter().enumerate() {
        let (root, s) = uf.find(d);
        let entry = classes.entry(root).or_default();
        entry.0.push((d, s));
        entry.1 |= b;
    }
    Ok(classes.into_values().collect())
}

/// Marks every DoF whose equivalence class touches the domain boundary.
/// For ℓ=1 only tangential edge DoFs can be marked.
pub fn boundary_dof_mask(space: &BrokenFemSpace) -> Result<Vec<bool>, DerhamError> {
    let mut mask = vec![false; space.dim()];
    if space.form() == FormDegree::Two {
        return Ok(mask);
    }
    for (members, boundary) in dof_classes(space)? {
        if boundary {
            for (d, _) in members {
                mask[d] = true;
            }
        }
    }
    Ok(mask)
}

/// Conforming projection acting on geometric DoFs: signed averages over
/// each interface class, optionally zeroing classes on the boundary.
pub fn geometric_conforming_projection(
    space: &BrokenFemSpace,
    bc: BoundaryCondition,
) -> Result<SparseMatrix, DerhamError> {
    let n = space.dim();
    if space.form() == FormDegree::Two {
        return Ok(SparseMatrix::identity(n));
    }
    let mut t = TripletBuilder::with_capacity(n, n, n);
    for (members, boundary) in dof_classes(space)? {
        if boundary && bc == BoundaryCondition::Homogeneous {
            continue;
        }
        let m = members.len() as f64;
        for &(a, sa) in &members {
            for &(b, sb) in &members {
                t.push(a, b, sa * sb / m);
            }
        }
    }
    Ok(t.build())
}

/// Conforming projection in the B-spline basis, `𝕂⁻¹ ℙ 𝕂`.
pub fn assemble_conforming_projection(
    complex: &DeRhamComplex,
    form: FormDegree,
    bc: BoundaryCondition,
) -> Result<SparseMatrix, DerhamError> {
    let space = complex.space(form);
    let n = space.dim();
    if form == FormDegree::Two {
        return Ok(SparseMatrix::identity(n));
    }
    let p = geometric_conforming_projection(space, bc)?;
    let delta = p.sub(&SparseMatrix::identity(n));
    // Rows where ℙ differs from the identity.
    let touched: Vec<usize> = (0..n).filter(|&i| delta.row(i).next().is_some()).collect();
    let mut t = TripletBuilder::with_capacity(n, n, n);
    for i in 0..n {
        t.push(i, i, 1.0);
    }
    let mut unit = vec![0.0; n];
    let mut cols: Vec<usize> = Vec::new();
    {
        // K is patch-block-diagonal; a column can only reach touched rows in its own patch.
        let mut patch_touched = vec![false; space.n_patches()];
        for &i in &touched {
            patch_touched[space.patch_of(i)] = true;
        }
        for j in 0..n {
            if patch_touched[space.patch_of(j)] {
                cols.push(j);
            }
        }
    }
    for j in cols {
        unit[j] = 1.0;
        let kcol = collocation_apply(complex, space, &unit);
        unit[j] = 0.0;
        let r = delta.mul_vec(&kcol);
        if r.iter().all(|&v| v == 0.0) {
            continue;
        }
        let col = collocation_solve(complex, space, &r);
        for (i, v) in col.into_iter().enumerate() {
            if v.abs() > 1e-15 {
                t.push(i, j, v);
            }
        }
    }
    Ok(t.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derham::assemble_incidence;
    use crate::geometry::builtin_topology;
    use std::sync::Arc;

    fn complex(name: &str, p: usize, n: usize) -> DeRhamComplex {
        DeRhamComplex::new(Arc::new(builtin_topology(name).unwrap()), p, n).unwrap()
    }

    fn max_diff(a: &SparseMatrix, b: &SparseMatrix) -> f64 {
        a.sub(b).max_abs()
    }

    #[test]
    fn shared_node_gets_half_weights() {
        let c = complex("two_patch_square", 2, 3);
        let v0 = c.v0();
        let p = geometric_conforming_projection(v0, BoundaryCondition::Inhomogeneous).unwrap();
        let n = c.knots().n_basis();
        // patch 0 east edge, interior node, twin on patch 1 west edge
        let a = v0.index(0, 0, n - 1, 2);
        let b = v0.index(1, 0, 0, 2);
        assert_eq!(p.row(a).count(), 2);
        assert_eq!(p.get(a, a), 0.5);
        assert_eq!(p.get(a, b), 0.5);
    }

    #[test]
    fn single_patch_inhomogeneous_is_identity() {
        let c = complex("unit_square", 3, 4);
        for form in [FormDegree::Zero, FormDegree::One, FormDegree::Two] {
            let p = assemble_conforming_projection(&c, form, BoundaryCondition::Inhomogeneous).unwrap();
            assert_eq!(max_diff(&p, &SparseMatrix::identity(c.space(form).dim())), 0.0);
        }
    }

    #[test]
    fn interior_corner_of_four_patches() {
        let c = complex("square_2x2", 2, 2);
        let v0 = c.v0();
        let p = geometric_conforming_projection(v0, BoundaryCondition::Homogeneous).unwrap();
        let n = c.knots().n_basis();
        // patch 0 is the lower left box, its north-east corner is the centre
        let a = v0.index(0, 0, n - 1, n - 1);
        assert_eq!(p.row(a).count(), 4);
        assert!(p.row(a).all(|(_, v)| v == 0.25));
    }

    #[test]
    fn homogeneous_zeroes_boundary_classes() {
        let c = complex("two_patch_square", 2, 3);
        let v1 = c.v1();
        let hom = geometric_conforming_projection(v1, BoundaryCondition::Homogeneous).unwrap();
        let inh = geometric_conforming_projection(v1, BoundaryCondition::Inhomogeneous).unwrap();
        let classes = dof_classes(v1).unwrap();
        let mut z = vec![1.0; v1.dim()];
        for (members, b) in &classes {
            if *b {
                for &(d, _) in members {
                    z[d] = 0.0;
                }
            }
        }
        let zp = SparseMatrix::diagonal(&z).matmul(&inh);
        assert_eq!(max_diff(&zp, &hom), 0.0);
        // normal components on the boundary are untouched
        let d = v1.index(0, 1, 2, 0);
        assert_eq!(hom.get(d, d), 1.0);
    }

    #[test]
    fn reversed_interfaces_on_annulus() {
        let c = complex("annulus", 2, 3);
        for form in [FormDegree::Zero, FormDegree::One] {
            for bc in [BoundaryCondition::Homogeneous, BoundaryCondition::Inhomogeneous] {
                let p = assemble_conforming_projection(&c, form, bc).unwrap();
                assert!(max_diff(&p.matmul(&p), &p) < 1e-13);
            }
        }
    }

    #[test]
    fn conforming_complex_property() {
        for name in ["two_patch_square", "annulus", "l_shape", "deformed_square"] {
            let c = complex(name, 3, 4);
            let (g, cu) = assemble_incidence(&c);
            for bc in [BoundaryCondition::Homogeneous, BoundaryCondition::Inhomogeneous] {
                let p0 = assemble_conforming_projection(&c, FormDegree::Zero, bc).unwrap();
                let p1 = assemble_conforming_projection(&c, FormDegree::One, bc).unwrap();
                let chain = cu.matmul(&p1).matmul(&g).matmul(&p0);
                assert!(chain.max_abs() < 1e-13, "{name}: {}", chain.max_abs());
            }
        }
    }
}
