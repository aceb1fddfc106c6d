//! The test-case registry and `run_case`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use conga::assembly::{assemble_maxwell_system, assemble_poisson_system, l2_error, Discretization};
use conga::derham::{BoundaryCondition, FemField, Field, FormDegree};
use conga::geometry::{builtin_topology, MultipatchTopology, Point, DEFAULT_TOLERANCE};
use conga::solvers::testcases::{
    dipole_current, maxwell_sincos_current, maxwell_sincos_solution, sincos, sincos_laplace_source, Pulse,
};
use conga::solvers::{
    eig_curlcurl, harmonic_basis, maxwell_leapfrog, predict_zero_eigenspace, relative_eigenvalue_error,
    solve_magnetostatic, solve_maxwell_harmonic, solve_poisson, weak_curl, ConservationTrace, EigenMode,
    LeapfrogOptions, MagnetostaticBc, PotentialSource, TimeDomainState, TimeHorizon, CONFORMITY_TOL, GAP_FACTOR,
    POSTCONDITION_TOL, ZERO_TOL,
};
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, SolutionName};
use crate::domain_file::load_domain;
use crate::output::{write_json, write_matrix, write_table, Cell, Table};
use crate::sample::sample_field;
use crate::{CliError, Context};

/// Stabilization used when extracting harmonic fields.
const HARMONIC_ALPHA: f64 = 10.0;
/// Relative tolerance of the CFL power iteration.
const POWER_TOL: f64 = 1e-8;

pub struct CaseInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// TOML table layered over the global defaults.
    pub defaults: &'static str,
    /// Whether the case reports an error against a reference solution.
    pub sweepable: bool,
}

pub const CASES: &[CaseInfo] = &[
    CaseInfo {
        name: "poisson_hom_manufactured",
        description: "Poisson, zero boundary values, manufactured sine or polynomial solution on subsets of the unit square",
        defaults: r#"domain = "square_2x2""#,
        sweepable: true,
    },
    CaseInfo {
        name: "poisson_inhom_sincos",
        description: "Poisson with φ = sin πx cos πy and its boundary values",
        defaults: r#"domain = "two_patch_square""#,
        sweepable: true,
    },
    CaseInfo {
        name: "maxwell_inhom_sincos",
        description: "time-harmonic Maxwell with u = (sin πy, sin πx cos πy), ω = π, tangential boundary values",
        defaults: "domain = \"annulus\"\nomega = 3.141592653589793",
        sweepable: true,
    },
    CaseInfo {
        name: "eig_curlcurl_square",
        description: "curl-curl eigenvalues with the split-mass pencil; exact values on [0,π]²",
        defaults: "domain = \"pi_square\"\ncells = 16",
        sweepable: true,
    },
    CaseInfo {
        name: "eig_hodge_annulus",
        description: "stabilized Hodge–Laplace spectrum and harmonic 1-forms",
        defaults: "domain = \"annulus\"\nalpha = 10.0\nbc = \"inhomogeneous\"",
        sweepable: false,
    },
    CaseInfo {
        name: "magnetostatic_vacuum_annulus",
        description: "magnetostatics with a dipole current, pseudo-vacuum boundary",
        defaults: r#"domain = "annulus""#,
        sweepable: false,
    },
    CaseInfo {
        name: "magnetostatic_metal_annulus",
        description: "magnetostatics with a dipole current, metallic boundary",
        defaults: r#"domain = "annulus""#,
        sweepable: false,
    },
    CaseInfo {
        name: "td_maxwell_pulse",
        description: "leap-frog Maxwell from a curl-of-pulse initial field, no current",
        defaults: "domain = \"deformed_square\"\nfinal_time = 3.2",
        sweepable: false,
    },
    CaseInfo {
        name: "td_maxwell_source_compare",
        description: "leap-frog Maxwell driven by a pulse current, one trace per source projection",
        defaults: "domain = \"deformed_square\"\nfinal_time = 20.0\nomega = 6.283185307179586\nsource_modes = [\"primal_pi1\", \"l2_proj\", \"dual_tilde_pi1\"]",
        sweepable: false,
    },
];

pub fn find_case(name: &str) -> Result<&'static CaseInfo, CliError> {
    CASES.iter().find(|c| c.name == name).ok_or_else(|| {
        let known: Vec<&str> = CASES.iter().map(|c| c.name).collect();
        CliError::Config(format!("unknown case '{name}'; known cases: {}", known.join(", ")))
    })
}

/// What a finished run left behind.
#[derive(Debug, Clone)]
pub struct CaseReport {
    pub dir: PathBuf,
    pub config_hash: String,
    /// Dimension of the space the unknown lives in.
    pub dofs: usize,
    /// Relative L² error, or the largest relative eigenvalue error, when a
    /// reference is known.
    pub error: Option<f64>,
    pub results: Map<String, Value>,
    pub files: Vec<PathBuf>,
}

struct CaseOutput {
    tables: Vec<Table>,
    results: Map<String, Value>,
    tolerances: Map<String, Value>,
    error: Option<f64>,
    dofs: usize,
}

impl CaseOutput {
    fn new(dofs: usize) -> Self {
        Self { tables: Vec::new(), results: Map::new(), tolerances: Map::new(), error: None, dofs }
    }
}

fn topology(cfg: &RunConfig) -> Result<MultipatchTopology, CliError> {
    match &cfg.domain_file {
        Some(path) => load_domain(path),
        None => builtin_topology(&cfg.domain).map_err(|e| CliError::Config(e.to_string())),
    }
}

fn output_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| Path::new("out").join(&cfg.case))
}

/// Runs one case and writes its CSVs, sampled fields, optional matrix
/// dumps and `summary.json` into the output directory.
pub fn run_case(cfg: &RunConfig) -> Result<CaseReport, CliError> {
    cfg.validate()?;
    let info = find_case(&cfg.case)?;
    let hash = cfg.hash()?;
    let topo = Arc::new(topology(cfg)?);
    let q = cfg.quadrature.unwrap_or(cfg.degree + 1);
    let d = Discretization::with_quadrature(topo.clone(), cfg.degree, cfg.cells, q).context("building the discretization")?;
    let out = match info.name {
        "poisson_hom_manufactured" => poisson_hom(cfg, &d)?,
        "poisson_inhom_sincos" => poisson_inhom(cfg, &d)?,
        "maxwell_inhom_sincos" => maxwell_inhom(cfg, &d)?,
        "eig_curlcurl_square" => eig_curlcurl_case(cfg, &d)?,
        "eig_hodge_annulus" => eig_hodge(cfg, &d)?,
        "magnetostatic_vacuum_annulus" => magnetostatic(cfg, &d, MagnetostaticBc::PseudoVacuum)?,
        "magnetostatic_metal_annulus" => magnetostatic(cfg, &d, MagnetostaticBc::Metallic)?,
        "td_maxwell_pulse" => td_pulse(cfg, &d)?,
        "td_maxwell_source_compare" => td_source_compare(cfg, &d)?,
        other => unreachable!("case {other} is registered but not dispatched"),
    };

    let dir = output_dir(cfg);
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Write { path: dir.clone(), source })?;
    let mut files = Vec::new();
    for t in &out.tables {
        files.push(write_table(&dir, t, &hash)?);
    }
    if cfg.dump_matrices {
        files.extend(dump_matrices(&d, &dir, &hash)?);
    }

    let mut tolerances = out.tolerances.clone();
    tolerances.insert("interface_matching".into(), json!(DEFAULT_TOLERANCE));
    // the output location stays out so that reruns elsewhere match byte for byte
    let mut shown = cfg.clone();
    shown.output = None;
    let summary = json!({
        "case": cfg.case,
        "config": serde_json::to_value(&shown).expect("config serializes"),
        "discretization": {
            "patches": topo.n_patches(),
            "degree": cfg.degree,
            "cells": cfg.cells,
            "dofs": [d.dim(FormDegree::Zero), d.dim(FormDegree::One), d.dim(FormDegree::Two)],
        },
        "quadrature": {
            "mass_and_moments_points": d.mass.quadrature_order(),
            "dof_points": d.dof_points,
            "error_norm_points": error_quadrature(cfg),
        },
        "tolerances": tolerances,
        "error": out.error,
        "results": out.results,
        "files": files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
    });
    let summary_path = dir.join("summary.json");
    write_json(&summary_path, &summary, &hash)?;
    files.push(summary_path);
    Ok(CaseReport { dir, config_hash: hash, dofs: out.dofs, error: out.error, results: out.results, files })
}

fn dump_matrices(d: &Discretization, dir: &Path, hash: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut names = Vec::new();
    for (name, m) in [
        ("mass0", d.mass.matrix(FormDegree::Zero)),
        ("mass1", d.mass.matrix(FormDegree::One)),
        ("mass2", d.mass.matrix(FormDegree::Two)),
        ("grad", &d.ops.grad),
        ("curl", &d.ops.curl),
        ("proj0_hom", d.p0(BoundaryCondition::Homogeneous)),
        ("proj0_inhom", d.p0(BoundaryCondition::Inhomogeneous)),
        ("proj1_hom", d.p1(BoundaryCondition::Homogeneous)),
        ("proj1_inhom", d.p1(BoundaryCondition::Inhomogeneous)),
    ] {
        write_matrix(dir, name, m, hash)?;
        names.push(dir.join(format!("{name}.coo")));
    }
    Ok(names)
}

fn error_quadrature(cfg: &RunConfig) -> usize {
    cfg.degree + 3
}

fn error_table(cfg: &RunConfig, dofs: usize, abs: f64, norm: f64) -> Table {
    let mut t = Table::new("errors", &["cells", "dofs", "l2_error", "relative_error"]);
    t.push(vec![cfg.cells.into(), dofs.into(), abs.into(), (abs / norm).into()]);
    t
}

fn solve_tolerances(out: &mut CaseOutput) {
    out.tolerances.insert("conformity".into(), json!(CONFORMITY_TOL));
}

fn finish_scalar_solve(
    cfg: &RunConfig,
    d: &Discretization,
    phi: &FemField,
    exact: &dyn Fn(Point) -> f64,
) -> Result<CaseOutput, CliError> {
    let (e, n) = l2_error(d, phi, Field::Scalar(exact), error_quadrature(cfg)).context("computing the L² error")?;
    let mut out = CaseOutput::new(d.dim(FormDegree::Zero));
    out.tables.push(error_table(cfg, out.dofs, e, n));
    out.tables.push(sample_field(&d.complex, phi, cfg.resolution, "phi"));
    out.error = Some(e / n);
    out.results.insert("l2_error".into(), json!(e));
    out.results.insert("relative_l2_error".into(), json!(e / n));
    solve_tolerances(&mut out);
    Ok(out)
}

type ScalarFn = Box<dyn Fn(Point) -> f64>;

fn poisson_hom(cfg: &RunConfig, d: &Discretization) -> Result<CaseOutput, CliError> {
    let (exact, source): (ScalarFn, ScalarFn) = match cfg.solution {
        SolutionName::Sine => (
            Box::new(|p: Point| (PI * p[0]).sin() * (PI * p[1]).sin()),
            Box::new(|p: Point| 2.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin()),
        ),
        SolutionName::Polynomial => (
            Box::new(|p: Point| p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])),
            Box::new(|p: Point| 2.0 * (p[0] * (1.0 - p[0]) + p[1] * (1.0 - p[1]))),
        ),
    };
    let sys = assemble_poisson_system(d, cfg.alpha, Field::Scalar(&*source), None).context("assembling the Poisson system")?;
    let phi = solve_poisson(d, &sys).context("solving the Poisson system")?;
    finish_scalar_solve(cfg, d, &phi, &*exact)
}

fn poisson_inhom(cfg: &RunConfig, d: &Discretization) -> Result<CaseOutput, CliError> {
    let lift = d.boundary_lifting(FormDegree::Zero, Field::Scalar(&sincos)).context("lifting boundary values")?;
    let sys = assemble_poisson_system(d, cfg.alpha, Field::Scalar(&sincos_laplace_source), Some(&lift))
        .context("assembling the Poisson system")?;
    let phi = solve_poisson(d, &sys).context("solving the Poisson system")?;
    finish_scalar_solve(cfg, d, &phi, &sincos)
}

fn maxwell_inhom(cfg: &RunConfig, d: &Discretization) -> Result<CaseOutput, CliError> {
    if (cfg.omega - PI).abs() > 1e-12 {
        return Err(CliError::Config(format!("maxwell_inhom_sincos is manufactured for ω = π, got {}", cfg.omega)));
    }
    let lift = d
        .boundary_lifting(FormDegree::One, Field::Vector(&maxwell_sincos_solution))
        .context("lifting tangential boundary values")?;
    let sys = assemble_maxwell_system(d, cfg.omega, cfg.alpha, Field::Vector(&maxwell_sincos_current), Some(&lift))
        .context("assembling the Maxwell system")?;
    let u = solve_maxwell_harmonic(d, &sys).context("solving the time-harmonic Maxwell system")?;
    let (e, n) = l2_error(d, &u, Field::Vector(&maxwell_sincos_solution), error_quadrature(cfg))
        .context("computing the L² error")?;
    let mut out = CaseOutput::new(d.dim(FormDegree::One));
    out.tables.push(error_table(cfg, out.dofs, e, n));
    out.tables.push(sample_field(&d.complex, &u, cfg.resolution, "u"));
    out.error = Some(e / n);
    out.results.insert("l2_error".into(), json!(e));
    out.results.insert("relative_l2_error".into(), json!(e / n));
    solve_tolerances(&mut out);
    Ok(out)
}

/// `m² + n²` over `m, n ≥ 0` not both zero, ascending, with multiplicity.
pub fn square_curlcurl_spectrum(count: usize) -> Vec<f64> {
    let k = (count as f64).sqrt().ceil() as usize + 2;
    let mut v: Vec<f64> = (0..=k)
        .flat_map(|m| (0..=k).map(move |n| (m * m + n * n) as f64))
        .filter(|&l| l > 0.0)
        .collect();
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

fn eigen_tolerances(out: &mut CaseOutput) {
    out.tolerances.insert("zero_eigenvalue".into(), json!(ZERO_TOL));
    out.tolerances.insert("spectral_gap_factor".into(), json!(GAP_FACTOR));
}

fn eig_curlcurl_case(cfg: &RunConfig, d: &Discretization) -> Result<CaseOutput, CliError> {
    let bc: BoundaryCondition = cfg.bc.into();
    let r = eig_curlcurl(d, bc, EigenMode::CongaGeneralized, false).context("solving the curl-curl eigenproblem")?;
    let pred = predict_zero_eigenspace(d, bc).context("predicting the kernel dimension")?;
    // the analytic spectrum is known for the built-in [0,π]² domains with
    // perfect conductor walls
    let exact = (cfg.domain_file.is_none()
        && matches!(cfg.domain.as_str(), "pi_square" | "pi_square_2x2")
        && bc == BoundaryCondition::Homogeneous)
        .then(|| square_curlcurl_spectrum(cfg.n_eigen));
    let mut t = Table::new("eigenvalues", &["index", "eigenvalue", "exact", "relative_error"]);
    let mut worst: Option<f64> = None;
    for (i, &l) in r.nonzero().iter().take(cfg.n_eigen).enumerate() {
        let ex = exact.as_ref().map(|e| e[i]);
        let err = ex.map(|e| relative_eigenvalue_error(e, l));
        if let Some(e) = err {
            worst = Some(worst.map_or(e, |w: f64| w.max(e)));
        }
        t.push(vec![(i + 1).into(), l.into(), ex.into(), err.into()]);
    }
    let mut out = CaseOutput::new(d.dim(FormDegree::One));
    out.tables.push(t);
    out.error = worst;
    out.results.insert("zero_count".into(), json!(r.zero_count()));
    out.results.insert(
        "zero_prediction".into(),
        json!({"gradients": pred.gradients, "jumps": pred.jumps, "harmonic": pred.harmonic, "total": pred.total()}),
    );
    out.results.insert("nonzero".into(), json!(r.nonzero().iter().take(cfg.n_eigen).collect::<Vec<_>>()));
    if let Some(w) = worst {
        out.results.insert("max_relative_error".into(), json!(w));
    }
    eigen_tolerances(&mut out);
    Ok(out)
}

fn eig_hodge(cfg: &RunConfig, d: &Discretization) -> Result<CaseOutput, CliError> {
    let bc: BoundaryCondition = cfg.bc.into();
    let r = eig_curlcurl(d, bc, EigenMode::HodgePenalized { alpha: cfg.alpha }, false)
        .context("solving the Hodge–Laplace eigenproblem")?;
    let h = harmonic_basis(d, bc, cfg.alpha, ZERO_TOL).context("extracting harmonic fields")?;
    let zeros = r.zero_count();
    let mut t = Table::new("eigenvalues", &["index", "eigenvalue"]);
    for (i, &l) in r.eigenvalues.iter().take(zeros + cfg.n_eigen).enumerate() {
        t.push(vec![(i + 1).into(), l.into()]);
    }
    let mut out = CaseOutput::new(d.dim(FormDegree::One));
    out.tables.push(t);
    for (k, f) in h.fields.iter().enumerate() {
        out.tables.push(sample_field(&d.complex, f, cfg.resolution, &format!("harmonic_{k}")));
    }
    let (b0, b1) = d.complex.topology().betti_numbers();
    out.results.insert("harmonic_count".into(), json!(h.len()));
    out.results.insert("betti_numbers".into(), json!([b0, b1]));
    out.results.insert("first_nonzero".into(), json!(r.nonzero().first()));
    eigen_tolerances(&mut out);
    Ok(out)
}

fn magnetostatic(cfg: &RunConfig, d: &Discretization, bc: MagnetostaticBc) -> Result<CaseOutput, CliError> {
    let sigma = cfg.sigma;
    let jz = move |p: Point| dipole_current(p, [0.0, 1.5], [0.0, -1.5], sigma);
    let h = harmonic_basis(d, bc.projection_bc(), HARMONIC_ALPHA, ZERO_TOL).context("extracting harmonic fields")?;
    let s = solve_magnetostatic(d, bc, cfg.alpha, cfg.alpha1, Field::Scalar(&jz), &h)
        .context("solving the magnetostatic system")?;
    let mut out = CaseOutput::new(d.dim(FormDegree::One));
    out.tables.push(sample_field(&d.complex, &s.b, cfg.resolution, "b"));
    let energy = 0.5 * d.mass.norm(FormDegree::One, s.b.coeffs()).powi(2);
    for (k, v) in [
        ("magnetic_energy", energy),
        ("p_relative", s.p_relative),
        ("z_relative", s.z_relative),
        ("jump_relative", s.jump_relative),
        ("harmonic_relative", s.harmonic_relative),
    ] {
        out.results.insert(k.into(), json!(v));
    }
    out.results.insert("harmonic_count".into(), json!(h.len()));
    out.tolerances.insert("postcondition".into(), json!(POSTCONDITION_TOL));
    eigen_tolerances(&mut out);
    Ok(out)
}

fn horizon(cfg: &RunConfig) -> Result<TimeHorizon, CliError> {
    match (cfg.steps, cfg.final_time) {
        (Some(n), _) => Ok(TimeHorizon::Steps(n)),
        (None, Some(t)) => Ok(TimeHorizon::Time(t)),
        (None, None) => Err(CliError::Config("set steps or final_time".into())),
    }
}

fn trace_table(name: &str, tr: &ConservationTrace) -> Table {
    let mut t = Table::new(name, &["step", "time", "energy", "pseudo_energy", "gauss", "gauss_conforming"]);
    for r in std::iter::once(&tr.initial).chain(&tr.records) {
        t.push(vec![
            r.step.into(),
            r.time.into(),
            r.energy.into(),
            r.pseudo_energy.into(),
            r.gauss.into(),
            r.gauss_conforming.into(),
        ]);
    }
    t
}

fn time_tolerances(out: &mut CaseOutput) {
    out.tolerances.insert("power_method".into(), json!(POWER_TOL));
}

fn leapfrog_options(cfg: &RunConfig, mode: crate::config::SourceModeName) -> Result<LeapfrogOptions, CliError> {
    Ok(LeapfrogOptions {
        horizon: horizon(cfg)?,
        cfl: cfg.cfl,
        source_mode: mode.into(),
        power_tol: POWER_TOL,
        ..Default::default()
    })
}

fn td_pulse(cfg: &RunConfig, d: &Discretization) -> Result<CaseOutput, CliError> {
    let pulse = Pulse::new([0.5, 0.5], cfg.sigma);
    let e = weak_curl(d, &|p| pulse.value(p)).context("projecting the initial field")?;
    let init = TimeDomainState::new(
        FemField::new(d.complex.v1().clone(), e).context("initial field")?,
        FemField::zeros(d.complex.v2().clone()),
    )
    .context("initial state")?;
    let opts = leapfrog_options(cfg, cfg.source_modes[0])?;
    let (state, tr) = maxwell_leapfrog(d, init, None, &opts).context("time stepping")?;
    let mut out = CaseOutput::new(d.dim(FormDegree::One) + d.dim(FormDegree::Two));
    out.tables.push(trace_table("trace", &tr));
    out.tables.push(sample_field(&d.complex, &state.e, cfg.resolution, "e_final"));
    out.tables.push(sample_field(&d.complex, &state.b, cfg.resolution, "b_final"));
    out.results.insert("dt".into(), json!(tr.dt));
    out.results.insert("steps".into(), json!(tr.records.len()));
    out.results.insert("curl_norm_squared".into(), json!(tr.curl_norm_sq.value));
    out.results.insert("pseudo_energy_drift".into(), json!(tr.pseudo_energy_drift()));
    out.results.insert("max_gauss".into(), json!(tr.max_gauss()));
    time_tolerances(&mut out);
    Ok(out)
}

fn td_source_compare(cfg: &RunConfig, d: &Discretization) -> Result<CaseOutput, CliError> {
    let pulse = Pulse::new([0.5, 0.5], cfg.sigma);
    let omega = cfg.omega;
    if omega == 0.0 {
        return Err(CliError::Config("td_maxwell_source_compare needs ω ≠ 0".into()));
    }
    let psi = |p: Point| pulse.value(p);
    let grad = |p: Point| pulse.gradient(p);
    let one = |_: f64| 1.0;
    // b(t) = −cos ωt
    let bint = move |t: f64| -(omega * t).sin() / omega;
    let src = PotentialSource { psi: &psi, grad_psi: &grad, curl_amplitude: &one, grad_amplitude_integral: &bint };
    let mut out = CaseOutput::new(d.dim(FormDegree::One) + d.dim(FormDegree::Two));
    for &mode in &cfg.source_modes {
        let opts = leapfrog_options(cfg, mode)?;
        let (_, tr) = maxwell_leapfrog(d, TimeDomainState::zeros(d), Some(&src), &opts)
            .context(&format!("time stepping with source mode {}", mode.label()))?;
        let q = (tr.records.len() / 4).max(1);
        let max_of = |s: &[conga::solvers::TraceRecord]| s.iter().fold(0.0, |m: f64, r| m.max(r.gauss_conforming));
        out.results.insert(
            mode.label().into(),
            json!({
                "dt": tr.dt,
                "steps": tr.records.len(),
                "max_gauss": tr.max_gauss(),
                "gauss_conforming_first_quarter_max": max_of(&tr.records[..q]),
                "gauss_conforming_last_quarter_max": max_of(&tr.records[tr.records.len() - q..]),
            }),
        );
        out.tables.push(trace_table(&format!("trace_{}", mode.label()), &tr));
    }
    time_tolerances(&mut out);
    Ok(out)
}

/// Reads column `name` of a table as floats; empty cells are skipped.
pub fn float_column(t: &Table, name: &str) -> Vec<f64> {
    let Some(c) = t.column(name) else { return Vec::new() };
    t.rows
        .iter()
        .filter_map(|r| match r[c] {
            Cell::Float(v) => Some(v),
            Cell::Int(i) => Some(i as f64),
            _ => None,
        })
        .collect()
}
