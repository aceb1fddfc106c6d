//! Field sampling on uniform reference grids.

use conga::derham::{evaluate_field, DeRhamComplex, FemField, FormDegree};

use crate::output::{Cell, Table};

/// Evaluates `field` at `resolution × resolution` uniformly spaced reference
/// points of every patch, endpoints included, and tabulates physical
/// coordinates and physical values (push-forwards applied).
pub fn sample_field(complex: &DeRhamComplex, field: &FemField, resolution: usize, name: &str) -> Table {
    let vector = field.space().form() == FormDegree::One;
    let cols: &[&str] = if vector { &["patch", "x", "y", "vx", "vy"] } else { &["patch", "x", "y", "value"] };
    let mut t = Table::new(name, cols);
    let topo = complex.topology();
    let r = resolution.max(2);
    for k in 0..topo.n_patches() {
        let map = topo.patch(k);
        for i in 0..r {
            for j in 0..r {
                let xh = [i as f64 / (r - 1) as f64, j as f64 / (r - 1) as f64];
                let x = map.map(xh);
                let v = evaluate_field(complex, field, k, xh);
                let mut row: Vec<Cell> = vec![k.into(), x[0].into(), x[1].into(), v[0].into()];
                if vector {
                    row.push(v[1].into());
                }
                t.push(row);
            }
        }
    }
    t
}
