use super::mapping::{mat_vec, PatchMapping, Point};
use super::GeometryError;

/// Reference edges of `[0,1]²`, each parametrized by `s ∈ [0,1]` in the
/// increasing direction of the free coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    /// `ŷ = 0`
    South,
    /// `x̂ = 1`
    East,
    /// `ŷ = 1`
    North,
    /// `x̂ = 0`
    West,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::South, Edge::East, Edge::North, Edge::West];

    pub fn point(self, s: f64) -> Point {
        match self {
            Edge::South => [s, 0.0],
            Edge::North => [s, 1.0],
            Edge::West => [0.0, s],
            Edge::East => [1.0, s],
        }
    }

    /// Reference axis along the edge (0 for `x̂`, 1 for `ŷ`).
    pub fn axis(self) -> usize {
        match self {
            Edge::South | Edge::North => 0,
            Edge::West | Edge::East => 1,
        }
    }

    /// Whether the edge sits at the upper end (`1`) of the normal axis.
    pub fn at_upper(self) -> bool {
        matches!(self, Edge::North | Edge::East)
    }

    pub fn corners(self) -> [Corner; 2] {
        match self {
            Edge::South => [Corner::SouthWest, Corner::SouthEast],
            Edge::North => [Corner::NorthWest, Corner::NorthEast],
            Edge::West => [Corner::SouthWest, Corner::NorthWest],
            Edge::East => [Corner::SouthEast, Corner::NorthEast],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Corner {
    SouthWest,
    SouthEast,
    NorthWest,
    NorthEast,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::SouthWest, Corner::SouthEast, Corner::NorthWest, Corner::NorthEast];

    /// Reference coordinates as `(x̂ ∈ {0,1}, ŷ ∈ {0,1})`.
    pub fn unit(self) -> (usize, usize) {
        match self {
            Corner::SouthWest => (0, 0),
            Corner::SouthEast => (1, 0),
            Corner::NorthWest => (0, 1),
            Corner::NorthEast => (1, 1),
        }
    }

    pub fn point(self) -> Point {
        let (i, j) = self.unit();
        [i as f64, j as f64]
    }

    pub fn edges(self) -> [Edge; 2] {
        match self {
            Corner::SouthWest => [Edge::South, Edge::West],
            Corner::SouthEast => [Edge::South, Edge::East],
            Corner::NorthWest => [Edge::North, Edge::West],
            Corner::NorthEast => [Edge::North, Edge::East],
        }
    }
}

/// A conforming interface `F_k(e_k(s)) = F_l(e_l(θ(s)))` with `θ(s) = s` or
/// `1 − s`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceRecord {
    pub patches: (usize, usize),
    pub edges: (Edge, Edge),
    /// `θ(s) = 1 − s` when set.
    pub reversed: bool,
    /// Relative sign of the edge tangents, `θ'`.
    pub sign: f64,
}

impl InterfaceRecord {
    /// Parameter on the second edge matching parameter `s` on the first.
    pub fn theta(&self, s: f64) -> f64 {
        if self.reversed {
            1.0 - s
        } else {
            s
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultipatchTopology {
    patches: Vec<PatchMapping>,
    interfaces: Vec<InterfaceRecord>,
    boundary_edges: Vec<(usize, Edge)>,
    vertex_classes: Vec<Vec<(usize, Corner)>>,
}

const SAMPLES: usize = 16;

impl MultipatchTopology {
    pub fn n_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn patches(&self) -> &[PatchMapping] {
        &self.patches
    }

    pub fn patch(&self, k: usize) -> &PatchMapping {
        &self.patches[k]
    }

    pub fn interfaces(&self) -> &[InterfaceRecord] {
        &self.interfaces
    }

    pub fn boundary_edges(&self) -> &[(usize, Edge)] {
        &self.boundary_edges
    }

    pub fn vertex_classes(&self) -> &[Vec<(usize, Corner)>] {
        &self.vertex_classes
    }

    pub fn is_boundary_edge(&self, k: usize, e: Edge) -> bool {
        self.boundary_edges.contains(&(k, e))
    }

    /// Whether two patches share an edge or a vertex (a patch is adjacent to
    /// itself).
    pub fn adjacent(&self, k: usize, l: usize) -> bool {
        k == l
            || self.interfaces.iter().any(|r| r.patches == (k, l) || r.patches == (l, k))
            || self.vertex_classes.iter().any(|c| c.iter().any(|v| v.0 == k) && c.iter().any(|v| v.0 == l))
    }

    /// `(b₀, b₁)` of the patch complex, from connectivity and the Euler
    /// characteristic `V − E + F`.
    pub fn betti_numbers(&self) -> (usize, usize) {
        let k = self.n_patches();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for r in &self.interfaces {
            let (a, b) = (find(&mut parent, r.patches.0), find(&mut parent, r.patches.1));
            parent[a] = b;
        }
        for c in &self.vertex_classes {
            for w in c.windows(2) {
                let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
                parent[a] = b;
            }
        }
        let b0 = (0..k).filter(|&i| find(&mut parent, i) == i).count();
        let v = self.vertex_classes.len() as i64;
        let e = (self.interfaces.len() + self.boundary_edges.len()) as i64;
        let chi = v - e + k as i64;
        (b0, (b0 as i64 - chi).max(0) as usize)
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn sample(i: usize) -> f64 {
    i as f64 / (SAMPLES - 1) as f64
}

/// Smallest distance from `p` to the mapped edge, by dense sampling followed
/// by a golden-section refinement.
fn distance_to_edge(m: &PatchMapping, e: Edge, p: Point) -> f64 {
    const COARSE: usize = 128;
    let f = |s: f64| dist(m.map(e.point(s)), p);
    let best = (0..=COARSE).min_by(|&a, &b| f(a as f64 / COARSE as f64).total_cmp(&f(b as f64 / COARSE as f64))).unwrap();
    let (mut a, mut b) = ((best as f64 - 1.0) / COARSE as f64, (best as f64 + 1.0) / COARSE as f64);
    a = a.max(0.0);
    b = b.min(1.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

/// Matches patch edges pairwise by sampling their parametrizations.
///
/// Edges that coincide with `θ(s) = s` or `1 − s` at all sample points
/// become interfaces; an edge whose interior lies on another edge without
/// matching its parametrization is a conformity error.
pub fn detect_topology(patches: Vec<PatchMapping>, tol: f64) -> Result<MultipatchTopology, GeometryError> {
    let k = patches.len();
    if k == 0 {
        return Err(GeometryError::InvalidParameters("no patches".into()));
    }
    let slots: Vec<(usize, Edge)> = (0..k).flat_map(|p| Edge::ALL.into_iter().map(move |e| (p, e))).collect();
    let pts: Vec<Vec<Point>> = slots
        .iter()
        .map(|&(p, e)| (0..SAMPLES).map(|i| patches[p].map(e.point(sample(i)))).collect())
        .collect();
    let mut matched = vec![None::<usize>; slots.len()];
    let mut interfaces = Vec::new();
    for a in 0..slots.len() {
        for b in a + 1..slots.len() {
            let forward = (0..SAMPLES).all(|i| dist(pts[a][i], pts[b][i]) < tol);
            let backward = (0..SAMPLES).all(|i| dist(pts[a][i], pts[b][SAMPLES - 1 - i]) < tol);
            let (ka, ea) = slots[a];
            let (kb, eb) = slots[b];
            if forward || backward {
                if ka == kb {
                    return Err(GeometryError::Conformity(format!("patch {ka} is glued to itself")));
                }
                if matched[a].is_some() || matched[b].is_some() {
                    return Err(GeometryError::Conformity(format!(
                        "edge {ea:?} of patch {ka} or {eb:?} of patch {kb} matched twice"
                    )));
                }
                matched[a] = Some(b);
                matched[b] = Some(a);
                let mid_a = mat_vec(&patches[ka].jacobian(ea.point(0.5)), unit(ea.axis()));
                let mid_b = mat_vec(&patches[kb].jacobian(eb.point(0.5)), unit(eb.axis()));
                let dot = mid_a[0] * mid_b[0] + mid_a[1] * mid_b[1];
                let sign = if dot > 0.0 { 1.0 } else { -1.0 };
                if (sign < 0.0) != backward {
                    return Err(GeometryError::Conformity(format!(
                        "tangent orientation disagrees with the matched parametrization between patches {ka} and {kb}"
                    )));
                }
                interfaces.push(InterfaceRecord { patches: (ka, kb), edges: (ea, eb), reversed: backward, sign });
                continue;
            }
            // reject partial overlaps: interior samples of one edge lying on the other
            let overlap = |x: usize, y: usize| {
                (1..SAMPLES - 1).any(|i| distance_to_edge(&patches[slots[y].0], slots[y].1, pts[x][i]) < tol)
            };
            if overlap(a, b) || overlap(b, a) {
                return Err(GeometryError::Conformity(format!(
                    "edge {ea:?} of patch {ka} overlaps edge {eb:?} of patch {kb} without a matching parametrization"
                )));
            }
        }
    }
    let boundary_edges: Vec<(usize, Edge)> =
        slots.iter().zip(&matched).filter(|(_, m)| m.is_none()).map(|(s, _)| *s).collect();

    let corners: Vec<(usize, Corner)> = (0..k).flat_map(|p| Corner::ALL.into_iter().map(move |c| (p, c))).collect();
    let cpts: Vec<Point> = corners.iter().map(|&(p, c)| patches[p].map(c.point())).collect();
    let mut class_of = vec![usize::MAX; corners.len()];
    let mut vertex_classes: Vec<Vec<(usize, Corner)>> = Vec::new();
    for i in 0..corners.len() {
        if class_of[i] != usize::MAX {
            continue;
        }
        let id = vertex_classes.len();
        let mut members = Vec::new();
        for j in i..corners.len() {
            if class_of[j] == usize::MAX && dist(cpts[i], cpts[j]) < tol {
                class_of[j] = id;
                members.push(corners[j]);
            }
        }
        vertex_classes.push(members);
    }
    for c in &vertex_classes {
        let mut ps: Vec<usize> = c.iter().map(|v| v.0).collect();
        ps.dedup();
        if ps.len() != c.len() {
            return Err(GeometryError::Conformity("two corners of one patch coincide".into()));
        }
    }
    Ok(MultipatchTopology { patches, interfaces, boundary_edges, vertex_classes })
}

fn unit(axis: usize) -> Point {
    if axis == 0 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

#[cfg(test)]
mod tests {
    use super::super::domains;
    use super::*;

    #[test]
    fn single_patch() {
        let t = detect_topology(vec![PatchMapping::identity()], 1e-9).unwrap();
        assert_eq!(t.interfaces().len(), 0);
        assert_eq!(t.boundary_edges().len(), 4);
        assert_eq!(t.vertex_classes().len(), 4);
        assert_eq!(t.betti_numbers(), (1, 0));
    }

    #[test]
    fn two_unit_squares_side_by_side() {
        let a = PatchMapping::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let b = PatchMapping::rectangle([1.0, 0.0], [2.0, 1.0]).unwrap();
        let t = detect_topology(vec![a, b], 1e-9).unwrap();
        assert_eq!(t.interfaces().len(), 1);
        let r = &t.interfaces()[0];
        assert_eq!(r.patches, (0, 1));
        assert_eq!(r.edges, (Edge::East, Edge::West));
        assert!(!r.reversed);
        assert_eq!(r.sign, 1.0);
        assert_eq!(t.boundary_edges().len(), 6);
        assert_eq!(t.betti_numbers(), (1, 0));
    }

    #[test]
    fn annulus_has_one_hole() {
        let t = detect_topology(domains::annulus(1.0, 2.0).unwrap(), 1e-9).unwrap();
        assert_eq!(t.interfaces().len(), 4);
        assert_eq!(t.boundary_edges().len(), 8);
        assert_eq!(t.betti_numbers(), (1, 1));
        assert!(t.vertex_classes().iter().all(|c| c.len() == 2));
    }

    #[test]
    fn reversed_interface_sign() {
        // second patch is the first rotated by π about (1, 0.5)
        let a = PatchMapping::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let b = PatchMapping::affine([2.0, 1.0], [[-1.0, 0.0], [0.0, -1.0]]).unwrap();
        let t = detect_topology(vec![a, b], 1e-9).unwrap();
        let r = &t.interfaces()[0];
        assert_eq!(r.edges, (Edge::East, Edge::East));
        assert!(r.reversed);
        assert_eq!(r.sign, -1.0);
    }

    #[test]
    fn four_patches_share_centre_vertex() {
        let t = detect_topology(domains::square_grid([0.0, 0.0], [1.0, 1.0], 2, 2).unwrap(), 1e-9).unwrap();
        assert_eq!(t.interfaces().len(), 4);
        assert_eq!(t.boundary_edges().len(), 8);
        let centre = t.vertex_classes().iter().find(|c| c.len() == 4);
        assert!(centre.is_some());
        assert_eq!(t.vertex_classes().len(), 9);
    }

    #[test]
    fn vertex_only_contact_is_recorded() {
        let a = PatchMapping::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let b = PatchMapping::rectangle([1.0, 1.0], [2.0, 2.0]).unwrap();
        let t = detect_topology(vec![a, b], 1e-9).unwrap();
        assert!(t.interfaces().is_empty());
        assert!(t.adjacent(0, 1));
        assert_eq!(t.vertex_classes().iter().filter(|c| c.len() == 2).count(), 1);
    }

    #[test]
    fn hanging_edge_is_rejected() {
        let a = PatchMapping::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let b = PatchMapping::rectangle([1.0, 0.0], [2.0, 0.5]).unwrap();
        assert!(matches!(detect_topology(vec![a, b], 1e-9), Err(GeometryError::Conformity(_))));
    }

    #[test]
    fn totality_and_orientation_on_catalog() {
        for name in domains::BUILTIN {
            let t = detect_topology(domains::builtin(name).unwrap(), 1e-9).unwrap();
            assert_eq!(4 * t.n_patches(), 2 * t.interfaces().len() + t.boundary_edges().len(), "{name}");
            for r in t.interfaces() {
                let (k, l) = r.patches;
                let (ek, el) = r.edges;
                for i in 0..SAMPLES {
                    let s = sample(i);
                    let pk = t.patch(k).map(ek.point(s));
                    let pl = t.patch(l).map(el.point(r.theta(s)));
                    assert!(dist(pk, pl) < 1e-10);
                    let tk = mat_vec(&t.patch(k).jacobian(ek.point(s)), unit(ek.axis()));
                    let tl = mat_vec(&t.patch(l).jacobian(el.point(r.theta(s))), unit(el.axis()));
                    assert!(dist(tk, [r.sign * tl[0], r.sign * tl[1]]) < 1e-10);
                }
                // interface endpoints lie in common vertex classes
                for (ck, cl) in [(0.0, r.theta(0.0)), (1.0, r.theta(1.0))] {
                    let find = |p: usize, e: Edge, s: f64| {
                        let c = if s == 0.0 { e.corners()[0] } else { e.corners()[1] };
                        t.vertex_classes().iter().position(|v| v.contains(&(p, c))).unwrap()
                    };
                    assert_eq!(find(k, ek, ck), find(l, el, cl));
                }
            }
        }
    }
}
