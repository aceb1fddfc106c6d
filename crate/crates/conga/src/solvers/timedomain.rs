use crate::assembly::Discretization;
use crate::bspline::BasisKind;
use crate::derham::{BoundaryCondition, FemField, Field, FormDegree};
use crate::geometry::Point;
use crate::linalg::{dot, power_method_spectral_radius, FnOperator, PowerReport};
use crate::quadrature::gauss_legendre_on;

use super::SolverError;

/// How the current enters the Ampère update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    /// Commuting projection `Π¹J`.
    PrimalPi1,
    /// Broken `L²` projection onto `V¹`.
    L2Proj,
    /// `(𝕄¹)⁻¹(ℙ¹)ᵀ` applied to the moments of `J`.
    DualTildePi1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeHorizon {
    Steps(usize),
    /// Δt is shrunk so that the final time is hit exactly.
    Time(f64),
}

#[derive(Debug, Clone)]
pub struct LeapfrogOptions {
    pub horizon: TimeHorizon,
    pub cfl: f64,
    pub source_mode: SourceMode,
    /// Overrides the CFL-based step.
    pub dt: Option<f64>,
    pub power_tol: f64,
    pub power_max_iter: usize,
}

impl Default for LeapfrogOptions {
    fn default() -> Self {
        Self {
            horizon: TimeHorizon::Steps(100),
            cfl: 0.8,
            source_mode: SourceMode::DualTildePi1,
            dt: None,
            power_tol: 1e-8,
            power_max_iter: 100_000,
        }
    }
}

/// Current of the form `J(t, x) = a(t) curl ψ(x) + b(t) ∇ψ(x)`.
///
/// The charge is `ρ(t) = −(∫₀ᵗ b) Δψ`, so that `∂ₜρ + div J = 0` with
/// `ρ(0) = 0`.
pub struct PotentialSource<'a> {
    pub psi: &'a dyn Fn(Point) -> f64,
    pub grad_psi: &'a dyn Fn(Point) -> Point,
    pub curl_amplitude: &'a dyn Fn(f64) -> f64,
    /// `∫₀ᵗ b`; the stepping averages `b` over each step through it.
    pub grad_amplitude_integral: &'a dyn Fn(f64) -> f64,
}

#[derive(Debug, Clone)]
pub struct TimeDomainState {
    pub e: FemField,
    pub b: FemField,
    pub t: f64,
    pub step: usize,
}

impl TimeDomainState {
    pub fn new(e: FemField, b: FemField) -> Result<Self, SolverError> {
        if e.space().form() != FormDegree::One || b.space().form() != FormDegree::Two {
            return Err(SolverError::Config("E must live in V¹ and B in V²".into()));
        }
        Ok(Self { e, b, t: 0.0, step: 0 })
    }

    pub fn zeros(d: &Discretization) -> Self {
        Self { e: FemField::zeros(d.complex.v1().clone()), b: FemField::zeros(d.complex.v2().clone()), t: 0.0, step: 0 }
    }

    pub fn is_finite(&self) -> bool {
        self.e.coeffs().iter().chain(self.b.coeffs()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub time: f64,
    /// `½(‖E‖² + ‖B‖²)`
    pub energy: f64,
    /// Leap-frog invariant built from `Eⁿ` and `B^{n+½}`.
    pub pseudo_energy: f64,
    pub gauss: f64,
    /// Gauss error of `ℙ¹E`.
    pub gauss_conforming: f64,
}

#[derive(Debug, Clone)]
pub struct ConservationTrace {
    pub dt: f64,
    /// Power-method estimate of `‖curl_h‖²`.
    pub curl_norm_sq: PowerReport,
    pub initial: TraceRecord,
    /// One record per step.
    pub records: Vec<TraceRecord>,
}

impl ConservationTrace {
    /// `max |ℋ*ⁿ − ℋ*⁰| / |ℋ*⁰|`
    pub fn pseudo_energy_drift(&self) -> f64 {
        let h0 = self.initial.pseudo_energy;
        let dev = self.records.iter().fold(0.0, |m: f64, r| m.max((r.pseudo_energy - h0).abs()));
        if h0 != 0.0 {
            dev / h0.abs()
        } else {
            dev
        }
    }

    pub fn max_gauss(&self) -> f64 {
        self.records.iter().fold(self.initial.gauss, |m, r| m.max(r.gauss))
    }
}

/// Largest eigenvalue of `(𝕄¹)⁻¹(ℂℙ¹)ᵀ𝕄²ℂℙ¹` by the power method in the
/// `𝕄¹` inner product.
pub fn curl_norm_squared(d: &Discretization, bc: BoundaryCondition, tol: f64, max_iter: usize) -> PowerReport {
    let cp = d.curl_conforming(bc);
    let m1 = d.mass.matrix(FormDegree::One);
    let m2 = d.mass.matrix(FormDegree::Two);
    let op = FnOperator::new(d.dim(FormDegree::One), |x: &[f64], y: &mut [f64]| {
        let w = cp.tr_mul_vec(&m2.mul_vec(&cp.mul_vec(x)));
        y.copy_from_slice(&d.mass.apply_mass_inverse(FormDegree::One, &w));
    });
    let inner = |x: &[f64], y: &[f64]| dot(x, &m1.mul_vec(y));
    power_method_spectral_radius(&op, &inner, tol, max_iter)
}

/// `(𝕄¹)⁻¹(ℂℙ¹)ᵀ m²(ψ)`: a weak curl of `ψ` with exactly zero weak
/// divergence.
pub fn weak_curl(d: &Discretization, psi: &dyn Fn(Point) -> f64) -> Result<Vec<f64>, SolverError> {
    let cp = d.curl_conforming(BoundaryCondition::Homogeneous);
    let m = d.moments(FormDegree::Two, Field::Scalar(psi))?;
    Ok(d.mass.apply_mass_inverse(FormDegree::One, &cp.tr_mul_vec(&m)))
}

/// `‖div~ F − Π~⁰ρ‖` given `F` and the charge moments `(ℙ⁰)ᵀm⁰(ρ)`.
pub fn gauss_error(d: &Discretization, f: &[f64], rho_moments: Option<&[f64]>) -> f64 {
    let gp = d.grad_conforming(BoundaryCondition::Homogeneous);
    gauss_error_with(d, &gp, f, rho_moments)
}

fn gauss_error_with(
    d: &Discretization,
    gp: &crate::linalg::SparseMatrix,
    f: &[f64],
    rho_moments: Option<&[f64]>,
) -> f64 {
    let mut r = gp.tr_mul_vec(&d.mass.matrix(FormDegree::One).mul_vec(f));
    r.iter_mut().for_each(|v| *v = -*v);
    if let Some(rho) = rho_moments {
        r.iter_mut().zip(rho).for_each(|(v, q)| *v -= q);
    }
    let s = d.mass.apply_mass_inverse(FormDegree::Zero, &r);
    dot(&r, &s).max(0.0).sqrt()
}

/// Per-patch boundary integrals `∮ ψ b̂·τ̂` of the ℓ=1 basis, which turn
/// `ℂᵀm²(ψ)` into the moments of `curl ψ`.
fn curl_boundary_terms(d: &Discretization, psi: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let space = d.complex.v1();
    let quad = &d.quad;
    let (x, w) = (quad.points(), quad.weights());
    let (nx, _) = space.component_shape(0);
    let last = space.component_shape(1).0 - 1;
    debug_assert_eq!(nx, last);
    let mut out = vec![0.0; space.dim()];
    for k in 0..space.n_patches() {
        let map = d.complex.topology().patch(k);
        for (idx, (&s, &ws)) in x.iter().zip(w).enumerate() {
            let vals = quad.values(BasisKind::MSpline, idx);
            let c = quad.cell(idx);
            // (component, edge point, fixed index on the normal axis, sign)
            let edges = [
                (0, [s, 0.0], 0, 1.0),
                (0, [s, 1.0], last, -1.0),
                (1, [1.0, s], last, 1.0),
                (1, [0.0, s], 0, -1.0),
            ];
            for (comp, pt, fixed, sign) in edges {
                let g = sign * ws * psi(map.map(pt));
                for (r, v) in vals.iter().enumerate() {
                    let i = if comp == 0 { space.index(k, 0, c + r, fixed) } else { space.index(k, 1, fixed, c + r) };
                    out[i] += g * v;
                }
            }
        }
    }
    out
}

struct SourceVectors {
    curl: Vec<f64>,
    grad: Vec<f64>,
    /// `(𝔾ℙ⁰)ᵀ m¹(∇ψ) = −(ℙ⁰)ᵀ m⁰(Δψ)`
    charge: Vec<f64>,
}

fn source_vectors(d: &Discretization, src: &PotentialSource<'_>, mode: SourceMode) -> Result<SourceVectors, SolverError> {
    let hom = BoundaryCondition::Homogeneous;
    let m1 = d.mass.matrix(FormDegree::One);
    let grad_moments = d.moments(FormDegree::One, Field::Vector(src.grad_psi))?;
    let psi_moments = d.moments(FormDegree::Two, Field::Scalar(src.psi))?;
    let (curl, grad) = match mode {
        SourceMode::PrimalPi1 => {
            let curl_psi = |p: Point| {
                let g = (src.grad_psi)(p);
                [g[1], -g[0]]
            };
            let pc = d.primal_projection(FormDegree::One, Field::Vector(&curl_psi))?;
            let pg = d.primal_projection(FormDegree::One, Field::Vector(src.grad_psi))?;
            (m1.mul_vec(&pc), m1.mul_vec(&pg))
        }
        SourceMode::L2Proj => {
            let beta = curl_boundary_terms(d, src.psi);
            let c: Vec<f64> = d.ops.curl.tr_mul_vec(&psi_moments).iter().zip(&beta).map(|(a, b)| a - b).collect();
            (c, grad_moments.clone())
        }
        SourceMode::DualTildePi1 => {
            let p = d.p1(hom);
            (d.curl_conforming(hom).tr_mul_vec(&psi_moments), p.tr_mul_vec(&grad_moments))
        }
    };
    let charge = d.grad_conforming(hom).tr_mul_vec(&grad_moments);
    Ok(SourceVectors { curl, grad, charge })
}

/// Leap-frog integration of the broken Maxwell system with perfect
/// conductor boundary conditions; records conservation diagnostics after
/// every step.
pub fn maxwell_leapfrog(
    d: &Discretization,
    initial: TimeDomainState,
    source: Option<&PotentialSource<'_>>,
    opts: &LeapfrogOptions,
) -> Result<(TimeDomainState, ConservationTrace), SolverError> {
    if !(opts.cfl > 0.0 && opts.cfl < 1.0) {
        return Err(SolverError::Config(format!("cfl factor must lie in (0, 1), got {}", opts.cfl)));
    }
    if initial.e.space().dim() != d.dim(FormDegree::One) || initial.b.space().dim() != d.dim(FormDegree::Two) {
        return Err(SolverError::Config("initial state does not match the discretization".into()));
    }
    let hom = BoundaryCondition::Homogeneous;
    let power = curl_norm_squared(d, hom, opts.power_tol, opts.power_max_iter);
    if !power.converged {
        return Err(SolverError::NotConverged { iterations: power.iterations, residual: power.residual });
    }
    let dt_cfl = opts.dt.unwrap_or(opts.cfl * 2.0 / power.value.sqrt());
    let (steps, dt) = match opts.horizon {
        TimeHorizon::Steps(n) => (n, dt_cfl),
        TimeHorizon::Time(t) => {
            if t <= 0.0 {
                return Err(SolverError::Config(format!("final time must be positive, got {t}")));
            }
            let n = (t / dt_cfl).ceil().max(1.0) as usize;
            (n, t / n as f64)
        }
    };

    let cp = d.curl_conforming(hom);
    let gp = d.grad_conforming(hom);
    let p1 = d.p1(hom);
    let m1 = d.mass.matrix(FormDegree::One);
    let m2 = d.mass.matrix(FormDegree::Two);
    let vectors = source.map(|s| source_vectors(d, s, opts.source_mode)).transpose()?;
    let (tg, wg) = gauss_legendre_on(0.0, 1.0, 4);

    let mut e = initial.e.coeffs().to_vec();
    let mut b = initial.b.coeffs().to_vec();
    let mut t = initial.t;

    let rho_at = |t: f64| -> Option<Vec<f64>> {
        let (s, v) = (source?, vectors.as_ref()?);
        let q = (s.grad_amplitude_integral)(t);
        Some(v.charge.iter().map(|c| q * c).collect())
    };
    let record = |step: usize, t: f64, e: &[f64], b: &[f64], cpe: &[f64]| -> TraceRecord {
        let m1e = m1.mul_vec(e);
        let bh: Vec<f64> = b.iter().zip(cpe).map(|(b, c)| b - 0.5 * dt * c).collect();
        let m2bh = m2.mul_vec(&bh);
        let rho = rho_at(t);
        TraceRecord {
            step,
            time: t,
            energy: 0.5 * (dot(e, &m1e) + dot(b, &m2.mul_vec(b))),
            pseudo_energy: 0.5 * (dot(e, &m1e) + dot(&bh, &m2bh)) + 0.5 * dt * dot(cpe, &m2bh),
            gauss: gauss_error_with(d, &gp, e, rho.as_deref()),
            gauss_conforming: gauss_error_with(d, &gp, &p1.mul_vec(e), rho.as_deref()),
        }
    };

    let mut cpe = cp.mul_vec(&e);
    let first = record(initial.step, t, &e, &b, &cpe);
    let mut records = Vec::with_capacity(steps);
    for n in 0..steps {
        b.iter_mut().zip(&cpe).for_each(|(b, c)| *b -= 0.5 * dt * c);
        let mut rhs = cp.tr_mul_vec(&m2.mul_vec(&b));
        if let (Some(s), Some(v)) = (source, &vectors) {
            let a: f64 = tg.iter().zip(&wg).map(|(x, w)| w * (s.curl_amplitude)(t + x * dt)).sum();
            // exact average, so the discrete charge balance matches ρ(t) to round-off
            let g = ((s.grad_amplitude_integral)(t + dt) - (s.grad_amplitude_integral)(t)) / dt;
            rhs.iter_mut().zip(&v.curl).zip(&v.grad).for_each(|((r, c), q)| *r -= a * c + g * q);
        }
        let de = d.mass.apply_mass_inverse(FormDegree::One, &rhs);
        e.iter_mut().zip(&de).for_each(|(e, d)| *e += dt * d);
        cpe = cp.mul_vec(&e);
        b.iter_mut().zip(&cpe).for_each(|(b, c)| *b -= 0.5 * dt * c);
        t = initial.t + (n + 1) as f64 * dt;
        let rec = record(initial.step + n + 1, t, &e, &b, &cpe);
        if !rec.energy.is_finite() || (source.is_none() && rec.energy > 10.0 * first.energy) {
            return Err(SolverError::Instability { step: n + 1, energy: rec.energy, initial: first.energy });
        }
        records.push(rec);
    }
    let state = TimeDomainState {
        e: FemField::new(d.complex.v1().clone(), e)?,
        b: FemField::new(d.complex.v2().clone(), b)?,
        t,
        step: initial.step + steps,
    };
    Ok((state, ConservationTrace { dt, curl_norm_sq: power, initial: first, records }))
}
