use std::sync::Arc;

use conga::assembly::{
    assemble_poisson_system, curl_curl_pencil, maxwell_matrix, poisson_matrix, Discretization,
};
use conga::derham::{BoundaryCondition, FemField, Field, FormDegree};
use conga::geometry::{builtin_topology, Point};
use conga::linalg::{dense_generalized_symmetric_eig, dot, SparseMatrix};
use conga::solvers::testcases::Pulse;
use conga::solvers::{
    eig_curlcurl, maxwell_leapfrog, solve_poisson, weak_curl, EigenMode, LeapfrogOptions, PotentialSource,
    SourceMode, TimeDomainState, TimeHorizon,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DOMAINS: [&str; 5] = ["two_patch_square", "square_2x2", "annulus", "deformed_square", "l_shape"];
const BCS: [BoundaryCondition; 2] = [BoundaryCondition::Homogeneous, BoundaryCondition::Inhomogeneous];

fn disc(name: &str, p: usize, n: usize) -> Discretization {
    Discretization::new(Arc::new(builtin_topology(name).unwrap()), p, n).unwrap()
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

fn small_disc() -> impl Strategy<Value = (usize, usize, usize)> {
    (0..DOMAINS.len(), 2usize..=3, 2usize..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projections_are_idempotent((dom, p, n) in small_disc(), seed in any::<u64>()) {
        let d = disc(DOMAINS[dom], p, n);
        for form in [FormDegree::Zero, FormDegree::One] {
            for bc in BCS {
                let pm = d.ops.projection(form, bc).unwrap();
                let pv = pm.mul_vec(&random_vec(d.dim(form), seed));
                prop_assert!(max_diff(&pm.mul_vec(&pv), &pv) < 1e-11 * max_abs(&pv).max(1.0));
            }
        }
    }

    #[test]
    fn homogeneous_range_sits_inside_inhomogeneous((dom, p, n) in small_disc(), seed in any::<u64>()) {
        let d = disc(DOMAINS[dom], p, n);
        for form in [FormDegree::Zero, FormDegree::One] {
            let hom = d.ops.projection(form, BoundaryCondition::Homogeneous).unwrap();
            let inh = d.ops.projection(form, BoundaryCondition::Inhomogeneous).unwrap();
            let v = random_vec(d.dim(form), seed);
            let hv = hom.mul_vec(&v);
            prop_assert!(max_diff(&inh.mul_vec(&hv), &hv) < 1e-11);
            prop_assert!(max_diff(&hom.mul_vec(&inh.mul_vec(&v)), &hv) < 1e-11);
        }
    }

    #[test]
    fn conforming_sequence_is_a_complex((dom, p, n) in small_disc(), seed in any::<u64>()) {
        let d = disc(DOMAINS[dom], p, n);
        let v = random_vec(d.dim(FormDegree::Zero), seed);
        prop_assert!(max_abs(&d.ops.curl.mul_vec(&d.ops.grad.mul_vec(&v))) < 1e-12);
        for bc in BCS {
            let g = d.grad_conforming(bc).mul_vec(&v);
            prop_assert!(max_abs(&d.curl_conforming(bc).mul_vec(&g)) < 1e-10 * max_abs(&g).max(1.0));
        }
    }

    #[test]
    fn mass_matrices_are_spd_and_patch_local((dom, p, n) in small_disc(), seed in any::<u64>()) {
        let d = disc(DOMAINS[dom], p, n);
        for form in [FormDegree::Zero, FormDegree::One, FormDegree::Two] {
            let m = d.mass.matrix(form);
            prop_assert!(m.asymmetry() < 1e-13 * m.max_abs());
            let v = random_vec(d.dim(form), seed);
            prop_assert!(dot(&v, &m.mul_vec(&v)) > 0.0);
            let space = d.complex.space(form);
            prop_assert!(m.triplets().all(|(i, j, _)| space.patch_of(i) == space.patch_of(j)));
        }
    }

    #[test]
    fn stabilization_is_inert_on_conforming_vectors(
        (dom, p, n) in small_disc(),
        seed in any::<u64>(),
        a1 in 0.1f64..100.0,
        a2 in 0.1f64..100.0,
        omega in 0.5f64..3.0,
    ) {
        let d = disc(DOMAINS[dom], p, n);
        let hom = BoundaryCondition::Homogeneous;
        let pairs: [(SparseMatrix, SparseMatrix, FormDegree); 2] = [
            (poisson_matrix(&d, a1), poisson_matrix(&d, a2), FormDegree::Zero),
            (maxwell_matrix(&d, omega, a1), maxwell_matrix(&d, omega, a2), FormDegree::One),
        ];
        for (m1, m2, form) in &pairs {
            prop_assert!(m1.asymmetry() < 1e-12 * m1.max_abs());
            let c = d.ops.projection(*form, hom).unwrap().mul_vec(&random_vec(d.dim(*form), seed));
            let (y1, y2) = (m1.mul_vec(&c), m2.mul_vec(&c));
            prop_assert!(max_diff(&y1, &y2) < 1e-10 * max_abs(&y1).max(1.0));
        }
    }

    #[test]
    fn pencil_eigenvectors_are_b_orthonormal((dom, p, n) in (0..DOMAINS.len(), 2usize..=3, 2usize..=3), hom in any::<bool>()) {
        let d = disc(DOMAINS[dom], p, n);
        let bc = if hom { BCS[0] } else { BCS[1] };
        let (a, b) = curl_curl_pencil(&d, bc);
        let eig = dense_generalized_symmetric_eig(a.as_ref(), b.as_ref(), true).unwrap();
        let v = eig.vectors.unwrap();
        let g = v.transpose() * &b * &v;
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        prop_assert!(worst < 1e-10, "{}", worst);
    }

    #[test]
    fn nonzero_eigenmodes_conform((dom, p) in (0..DOMAINS.len(), 2usize..=3)) {
        let d = disc(DOMAINS[dom], p, 2);
        let bc = BoundaryCondition::Homogeneous;
        let r = eig_curlcurl(&d, bc, EigenMode::CongaGeneralized, true).unwrap();
        let pm = d.p1(bc);
        for (lam, f) in r.eigenvalues.iter().zip(&r.eigenvectors) {
            if *lam > r.zero_threshold {
                let x = f.coeffs();
                let jump: Vec<f64> = x.iter().zip(pm.mul_vec(x)).map(|(a, b)| a - b).collect();
                prop_assert!(d.mass.norm(FormDegree::One, &jump) <= 1e-9 * d.mass.norm(FormDegree::One, x));
            }
        }
    }

    #[test]
    fn poisson_solution_conforms_and_ignores_alpha(
        (dom, p, n) in small_disc(),
        a1 in 0.1f64..100.0,
        a2 in 0.1f64..100.0,
        kx in 0.5f64..3.0,
    ) {
        let d = disc(DOMAINS[dom], p, n);
        let f = move |x: Point| (kx * x[0]).sin() + x[1] * x[1];
        let g = |x: Point| x[0] - 2.0 * x[1];
        let lift = d.boundary_lifting(FormDegree::Zero, Field::Scalar(&g)).unwrap();
        let solve = |alpha: f64| {
            let sys = assemble_poisson_system(&d, alpha, Field::Scalar(&f), Some(&lift)).unwrap();
            solve_poisson(&d, &sys).unwrap()
        };
        let (u1, u2) = (solve(a1), solve(a2));
        let x = u1.coeffs();
        let px = d.p0(BoundaryCondition::Inhomogeneous).mul_vec(x);
        let norm = d.mass.norm(FormDegree::Zero, x);
        let jump: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
        prop_assert!(d.mass.norm(FormDegree::Zero, &jump) <= 1e-9 * norm);
        let diff: Vec<f64> = x.iter().zip(u2.coeffs()).map(|(a, b)| a - b).collect();
        prop_assert!(d.mass.norm(FormDegree::Zero, &diff) <= 1e-8 * norm);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn charge_conserving_sources_keep_gauss_law(
        dom in prop::sample::select(vec!["two_patch_square", "deformed_square", "annulus"]),
        cx in 0.3f64..0.7,
        cy in 0.3f64..0.7,
        omega in 1.0f64..8.0,
        dual in any::<bool>(),
    ) {
        let d = disc(dom, 2, 4);
        // keep the pulse inside every catalog domain
        let center = if dom == "annulus" { [cx + 1.0, cy] } else { [cx, cy] };
        let pulse = Pulse::new(center, 0.1);
        let psi = |p: Point| pulse.value(p);
        let grad = |p: Point| pulse.gradient(p);
        let a = move |t: f64| (omega * t).sin();
        let bint = move |t: f64| (omega * t).sin() / omega;
        let src = PotentialSource { psi: &psi, grad_psi: &grad, curl_amplitude: &a, grad_amplitude_integral: &bint };
        let mode = if dual { SourceMode::DualTildePi1 } else { SourceMode::L2Proj };
        let opts = LeapfrogOptions { horizon: TimeHorizon::Steps(40), source_mode: mode, ..Default::default() };
        let (_, trace) = maxwell_leapfrog(&d, TimeDomainState::zeros(&d), Some(&src), &opts).unwrap();
        prop_assert!(trace.max_gauss() < 1e-10, "{}", trace.max_gauss());
    }

    #[test]
    fn source_free_leapfrog_conserves_pseudo_energy(
        dom in prop::sample::select(vec!["two_patch_square", "square_2x2", "deformed_square"]),
        cx in 0.3f64..0.7,
        cy in 0.3f64..0.7,
        cfl in 0.3f64..0.95,
    ) {
        let d = disc(dom, 2, 4);
        let pulse = Pulse::new([cx, cy], 0.1);
        let e = weak_curl(&d, &|p| pulse.value(p)).unwrap();
        let state = TimeDomainState::new(
            FemField::new(d.complex.v1().clone(), e).unwrap(),
            FemField::zeros(d.complex.v2().clone()),
        ).unwrap();
        let opts = LeapfrogOptions { horizon: TimeHorizon::Steps(60), cfl, ..Default::default() };
        let (_, trace) = maxwell_leapfrog(&d, state, None, &opts).unwrap();
        prop_assert!(trace.pseudo_energy_drift() < 1e-11);
        prop_assert!(trace.max_gauss() < 1e-11);
    }
}
