use crate::bspline::BasisKind;
use crate::derham::{DeRhamComplex, FormDegree, QuadratureGrid};
use crate::linalg::{BlockCholesky, SparseMatrix, TripletBuilder};

use super::AssemblyError;

fn len_of(kind: BasisKind, p: usize) -> usize {
    match kind {
        BasisKind::NSpline => p + 1,
        BasisKind::MSpline => p,
    }
}

/// Mapped mass matrix `𝕄^ℓ` with reference weights `J` (ℓ=0),
/// `(DFᵀDF)⁻¹ J` (ℓ=1) and `1/J` (ℓ=2).
pub fn assemble_mass(
    complex: &DeRhamComplex,
    form: FormDegree,
    quad: &QuadratureGrid,
) -> Result<SparseMatrix, AssemblyError> {
    let space = complex.space(form);
    let p = complex.degree();
    let nc = complex.n_cells();
    let q = quad.points_per_cell();
    let (x, w) = (quad.points(), quad.weights());
    let comps = space.components();
    let local_len: usize = comps.iter().map(|&(kx, ky)| len_of(kx, p) * len_of(ky, p)).sum();
    let mut t = TripletBuilder::with_capacity(space.dim(), space.dim(), space.n_patches() * nc * nc * local_len * local_len);
    let mut dofs = Vec::with_capacity(local_len);
    let mut comp_of = Vec::with_capacity(local_len);
    let mut phi = vec![0.0; local_len];
    let mut local = vec![0.0; local_len * local_len];
    for k in 0..space.n_patches() {
        let map = complex.topology().patch(k);
        for cx in 0..nc {
            for cy in 0..nc {
                dofs.clear();
                comp_of.clear();
                for (c, &(kx, ky)) in comps.iter().enumerate() {
                    for r in 0..len_of(kx, p) {
                        for s in 0..len_of(ky, p) {
                            dofs.push(space.index(k, c, cx + r, cy + s));
                            comp_of.push(c);
                        }
                    }
                }
                local.iter_mut().for_each(|v| *v = 0.0);
                for a in cx * q..(cx + 1) * q {
                    for b in cy * q..(cy + 1) * q {
                        let mt = map.metric_terms([x[a], x[b]])?;
                        let ww = w[a] * w[b];
                        let weight = match form {
                            FormDegree::Zero => [[mt.det, 0.0], [0.0, 0.0]],
                            FormDegree::One => {
                                let g = mt.g_inv;
                                [[g[0][0] * mt.det, g[0][1] * mt.det], [g[1][0] * mt.det, g[1][1] * mt.det]]
                            }
                            FormDegree::Two => [[1.0 / mt.det, 0.0], [0.0, 0.0]],
                        };
                        let mut off = 0;
                        for &(kx, ky) in comps {
                            let (vx, vy) = (quad.values(kx, a), quad.values(ky, b));
                            for a_ in vx {
                                for b_ in vy {
                                    phi[off] = a_ * b_;
                                    off += 1;
                                }
                            }
                        }
                        for i in 0..local_len {
                            let wi = ww * phi[i];
                            let row = &mut local[i * local_len..(i + 1) * local_len];
                            for j in 0..local_len {
                                row[j] += wi * weight[comp_of[i]][comp_of[j]] * phi[j];
                            }
                        }
                    }
                }
                for i in 0..local_len {
                    for j in 0..local_len {
                        t.push(dofs[i], dofs[j], local[i * local_len + j]);
                    }
                }
            }
        }
    }
    let m = t.build();
    // exact symmetry
    Ok(SparseMatrix::lin_comb(0.5, &m, 0.5, &m.transpose()))
}

/// The three mass matrices with cached patchwise Cholesky factors.
#[derive(Debug)]
pub struct MassMatrices {
    matrices: [SparseMatrix; 3],
    factors: [BlockCholesky; 3],
    quadrature_order: usize,
}

impl MassMatrices {
    pub fn new(complex: &DeRhamComplex, quad: &QuadratureGrid) -> Result<Self, AssemblyError> {
        let forms = [FormDegree::Zero, FormDegree::One, FormDegree::Two];
        let mut matrices = Vec::with_capacity(3);
        let mut factors = Vec::with_capacity(3);
        for form in forms {
            let m = assemble_mass(complex, form, quad)?;
            let ranges = complex.space(form).patch_ranges();
            let f = BlockCholesky::new(&m, &ranges).map_err(|_| AssemblyError::NotPositiveDefinite { form: form.index() })?;
            matrices.push(m);
            factors.push(f);
        }
        let matrices: [SparseMatrix; 3] = matrices.try_into().expect("three forms");
        let factors: [BlockCholesky; 3] = factors.try_into().expect("three forms");
        Ok(Self { matrices, factors, quadrature_order: quad.points_per_cell() })
    }

    pub fn matrix(&self, form: FormDegree) -> &SparseMatrix {
        &self.matrices[form.index()]
    }

    pub fn factor(&self, form: FormDegree) -> &BlockCholesky {
        &self.factors[form.index()]
    }

    /// `(𝕄^ℓ)⁻¹ b` by independent patch solves.
    pub fn apply_mass_inverse(&self, form: FormDegree, b: &[f64]) -> Vec<f64> {
        self.factors[form.index()].solve(b)
    }

    /// `sqrt(xᵀ 𝕄^ℓ x)`.
    pub fn norm(&self, form: FormDegree, x: &[f64]) -> f64 {
        let mx = self.matrices[form.index()].mul_vec(x);
        x.iter().zip(&mx).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }
}
