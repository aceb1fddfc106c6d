use crate::derham::{evaluate_field, FemField, Field, FormDegree, QuadratureGrid};
use crate::geometry::det2;

use super::{AssemblyError, Discretization};

/// `(‖u_h − u‖, ‖u‖)` in `L²(Ω)`, with `q` Gauss points per cell and
/// direction.
pub fn l2_error(d: &Discretization, field: &FemField, exact: Field<'_>, q: usize) -> Result<(f64, f64), AssemblyError> {
    let quad = QuadratureGrid::new(&d.complex, q);
    let (x, w) = (quad.points(), quad.weights());
    let vector = field.space().form() == FormDegree::One;
    let (mut err, mut norm) = (0.0, 0.0);
    for k in 0..d.complex.topology().n_patches() {
        let map = d.complex.topology().patch(k);
        for (a, &wa) in x.iter().zip(w) {
            for (b, &wb) in x.iter().zip(w) {
                let pt = [*a, *b];
                let jw = wa * wb * det2(&map.jacobian(pt));
                let uh = evaluate_field(&d.complex, field, k, pt);
                let phys = map.map(pt);
                let u = if vector { exact.vector()?(phys) } else { [exact.scalar()?(phys), 0.0] };
                err += jw * ((uh[0] - u[0]).powi(2) + (uh[1] - u[1]).powi(2));
                norm += jw * (u[0] * u[0] + u[1] * u[1]);
            }
        }
    }
    Ok((err.sqrt(), norm.sqrt()))
}
