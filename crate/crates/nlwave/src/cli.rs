//! Experiment commands behind the `nlwave` binary: config ingestion,
//! solver orchestration, and deterministic CSV/JSON emission.
//!
//! Exit codes: 0 success (possibly with warnings), 1 stability property
//! failure, 2 config error, 3 runtime solver or I/O error.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{self, Manufactured};
use crate::assembly::{self, AssembledSystem};
use crate::basis::composite_gauss_rule;
use crate::collocation::{self, CollocationGrid};
use crate::config::*;
use crate::error::Error;
use crate::evolve::{self, Scheme, Snapshot};
use crate::kernel::KernelSpec;
use crate::output::{self, KernelReport, ResolvedParams, RunMeta, StabilityRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// A scheme flagged unconditionally stable fails its stability row when the
/// companion radius exceeds 1 by more than this.
pub const STABILITY_TOLERANCE: f64 = 1e-8;

/// Kernel mass at the domain center below this triggers the truncation
/// warning: the domain is too narrow for the kernel to be normalized on it.
pub const TRUNCATION_WARN_THRESHOLD: f64 = 0.999;

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::MisalignedSnapshot { .. } => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn resolve_out_dir(cfg_out: Option<&OutputConfig>, out_override: Option<&Path>) -> PathBuf {
    if let Some(p) = out_override {
        return p.to_path_buf();
    }
    cfg_out
        .and_then(|o| o.dir.as_deref())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<(), Error> {
    for (name, contents) in files {
        output::write_atomic(&dir.join(name), contents)
            .map_err(|e| Error::InvalidConfig(format!("cannot write {name}: {e}")))?;
    }
    Ok(())
}

fn report_error(err: &Error) -> i32 {
    eprintln!("error: {err}");
    exit_code_for(err)
}

/// `nlwave run <config>`: solve one problem and emit snapshots.csv and
/// meta.json into the output directory.
pub fn cmd_run(config_path: &Path, out_override: Option<&Path>, quiet: bool) -> i32 {
    let cfg: RunConfig = match load_json(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    if let Err(e) = cfg.validate() {
        return report_error(&e);
    }
    let dir = resolve_out_dir(cfg.output.as_ref(), out_override);
    let result = match cfg.solver.as_str() {
        "galerkin" => run_galerkin(&cfg, &dir),
        "collocation1d" => run_collocation(&cfg, &dir),
        "midpoint2d" => run_midpoint2d(&cfg, &dir),
        _ => unreachable!("validated"),
    };
    match result {
        Ok(warnings) => {
            if !quiet {
                for w in &warnings {
                    eprintln!("warning: {w}");
                }
                println!("wrote {} and {}", dir.join("snapshots.csv").display(), dir.join("meta.json").display());
            }
            EXIT_OK
        }
        Err(e) => report_error(&e),
    }
}

fn galerkin_rule(
    spec: &KernelSpec,
    n: usize,
    lo: f64,
    hi: f64,
    q: Option<&QuadratureConfig>,
) -> Result<(crate::basis::QuadratureRule, usize, usize), Error> {
    let (def_points, def_panels) = assembly::default_rule_params(spec, n, lo, hi);
    let points = q.and_then(|q| q.points).unwrap_or(def_points);
    let panels = q.and_then(|q| q.panels).unwrap_or(def_panels);
    Ok((composite_gauss_rule(points, panels, lo, hi)?, points, panels))
}

fn kernel_report_for_rule(spec: &KernelSpec, lo: f64, hi: f64, rule: &crate::basis::QuadratureRule) -> KernelReport {
    let center = 0.5 * (lo + hi);
    let mass_at = |x: f64| spec.mass(x, lo, hi, rule);
    let mass_at_center = mass_at(center);
    let mut mass_min = f64::INFINITY;
    let mut mass_max = f64::NEG_INFINITY;
    for &x in rule.nodes() {
        let m = mass_at(x);
        mass_min = mass_min.min(m);
        mass_max = mass_max.max(m);
    }
    KernelReport {
        mass_at_center,
        mass_min,
        mass_max,
        truncation_warning: mass_at_center < TRUNCATION_WARN_THRESHOLD,
    }
}

fn run_galerkin(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>, Error> {
    let domain = cfg.domain();
    let (lo, hi) = (domain.lo, domain.hi);
    let spec = cfg.kernel.build("kernel")?;
    let n = cfg.degree.expect("validated");
    let scheme = cfg.scheme_parsed();
    let a2_mode = cfg.a2_mode_parsed();
    let (rule, points, panels) = galerkin_rule(&spec, n, lo, hi, cfg.quadrature.as_ref())?;

    let u0 = cfg.u0.function_1d("u0", (lo, hi))?;
    let v0 = cfg.v0.function_1d("v0", (lo, hi))?;
    let g = cfg.g.function().expect("validated: not manufactured");

    let kernel_report = kernel_report_for_rule(&spec, lo, hi, &rule);
    let system = assembly::build_system(&spec, n, cfg.rho, g, a2_mode, rule)?;
    let bounds = analysis::bounds_report(&system);

    let sample_points = cfg.sample_grid.as_ref().map(|s| s.points).unwrap_or(201);
    let grid = evolve::uniform_grid(lo, hi, sample_points);
    let snaps = evolve::run(&system, u0, v0, cfg.dt, cfg.t_end, scheme, &grid, &cfg.snapshot_times)?;

    let mut warnings = Vec::new();
    if kernel_report.truncation_warning {
        warnings.push(format!(
            "kernel mass over the domain is {:.6} < {TRUNCATION_WARN_THRESHOLD} (truncation)",
            kernel_report.mass_at_center
        ));
    }
    let meta = RunMeta {
        command: "run".into(),
        solver: "galerkin".into(),
        resolved: ResolvedParams {
            degree: Some(n),
            quadrature_points: Some(points),
            quadrature_panels: Some(panels),
            grid_points: None,
            cells: None,
            kernel_scale: spec.scale(),
            kernel_width: spec.width(),
            wrap_radius: spec.periodization().map(|p| p.wrap_radius),
            rho: cfg.rho,
            scheme: Some(scheme.name().into()),
            a2_mode: Some(match a2_mode {
                assembly::A2Mode::UnitMass => "unitMass".into(),
                assembly::A2Mode::ExactMass => "exactMass".into(),
            }),
            dt: cfg.dt,
            t_end: cfg.t_end,
            sample_points: Some(sample_points),
        },
        kernel_report: Some(kernel_report),
        bounds: Some(bounds),
        warnings: warnings.clone(),
    };
    write_outputs(
        dir,
        &[
            ("snapshots.csv", output::snapshots_csv(&snaps)),
            ("meta.json", output::meta_json(&meta)),
        ],
    )?;
    Ok(warnings)
}

fn grid_from_config(gc: &GridConfig, lo: f64, hi: f64, periodic: bool) -> Result<CollocationGrid, Error> {
    match gc {
        GridConfig::SingleGauss { points } => collocation::single_gauss_grid(lo, hi, *points),
        GridConfig::CompositeGauss { subdomains, points } => {
            collocation::composite_grid(lo, hi, *subdomains, *points)
        }
        GridConfig::UniformMidpoint { cells } => Ok(collocation::midpoint_grid(lo, hi, *cells, periodic)),
    }
}

fn run_collocation(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>, Error> {
    let domain = cfg.domain();
    let (lo, hi) = (domain.lo, domain.hi);
    let spec = cfg.kernel.build("kernel")?;
    let scheme = cfg.scheme_parsed();
    let grid = grid_from_config(cfg.grid.as_ref().expect("validated"), lo, hi, spec.periodization().is_some())?;

    let u0 = cfg.u0.function_1d("u0", (lo, hi))?;
    let v0 = cfg.v0.function_1d("v0", (lo, hi))?;
    let g = cfg.g.function().expect("validated: not manufactured");

    let mass_at = |x: f64| -> f64 {
        grid.points
            .iter()
            .zip(&grid.weights)
            .map(|(&y, &w)| w * spec.eval(x - y))
            .sum()
    };
    let center = 0.5 * (lo + hi);
    let mass_at_center = mass_at(center);
    let (mut mass_min, mut mass_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in &grid.points {
        let m = mass_at(x);
        mass_min = mass_min.min(m);
        mass_max = mass_max.max(m);
    }
    let kernel_report = KernelReport {
        mass_at_center,
        mass_min,
        mass_max,
        truncation_warning: mass_at_center < TRUNCATION_WARN_THRESHOLD,
    };

    let snaps = collocation::run_collocation_1d(
        &spec,
        &grid,
        cfg.rho,
        g,
        u0,
        v0,
        cfg.dt,
        cfg.t_end,
        scheme,
        &cfg.snapshot_times,
    )?;

    let mut warnings = Vec::new();
    if kernel_report.truncation_warning {
        warnings.push(format!(
            "kernel mass over the domain is {:.6} < {TRUNCATION_WARN_THRESHOLD} (truncation)",
            kernel_report.mass_at_center
        ));
    }
    let meta = RunMeta {
        command: "run".into(),
        solver: "collocation1d".into(),
        resolved: ResolvedParams {
            degree: None,
            quadrature_points: None,
            quadrature_panels: None,
            grid_points: Some(grid.len()),
            cells: None,
            kernel_scale: spec.scale(),
            kernel_width: spec.width(),
            wrap_radius: spec.periodization().map(|p| p.wrap_radius),
            rho: cfg.rho,
            scheme: Some(scheme.name().into()),
            a2_mode: None,
            dt: cfg.dt,
            t_end: cfg.t_end,
            sample_points: None,
        },
        kernel_report: Some(kernel_report),
        bounds: None,
        warnings: warnings.clone(),
    };
    write_outputs(
        dir,
        &[
            ("snapshots.csv", output::snapshots_csv(&snaps)),
            ("meta.json", output::meta_json(&meta)),
        ],
    )?;
    Ok(warnings)
}

fn run_midpoint2d(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>, Error> {
    if cfg.kernel.periodic.unwrap_or(false) && cfg.kernel.period != Some(1.0) {
        return Err(Error::InvalidConfig(
            "kernel.period: midpoint2d periodizes over the unit torus".into(),
        ));
    }
    // the torus kernel is built internally from the scale alone
    let spec = cfg.kernel.build("kernel")?;
    let n = cfg.cells.expect("validated");
    let u0 = cfg.u0.function_2d("u0")?;
    let v0 = cfg.v0.function_2d("v0")?;
    let snaps = collocation::run_midpoint_2d(
        spec.scale(),
        n,
        cfg.rho,
        u0,
        v0,
        cfg.dt,
        cfg.t_end,
        &cfg.snapshot_times,
    )?;

    let torus_kernel = KernelSpec::gaussian(spec.scale()).periodized(1.0);
    let h = 1.0 / n as f64;
    let mass: f64 = (0..n).map(|i| h * torus_kernel.eval(i as f64 * h)).sum();
    let kernel_report = KernelReport {
        mass_at_center: mass,
        mass_min: mass,
        mass_max: mass,
        truncation_warning: false,
    };

    let meta = RunMeta {
        command: "run".into(),
        solver: "midpoint2d".into(),
        resolved: ResolvedParams {
            degree: None,
            quadrature_points: None,
            quadrature_panels: None,
            grid_points: None,
            cells: Some(n),
            kernel_scale: spec.scale(),
            kernel_width: spec.width(),
            wrap_radius: torus_kernel.periodization().map(|p| p.wrap_radius),
            rho: cfg.rho,
            scheme: Some("semiImplicitEuler".into()),
            a2_mode: None,
            dt: cfg.dt,
            t_end: cfg.t_end,
            sample_points: None,
        },
        kernel_report: Some(kernel_report),
        bounds: None,
        warnings: Vec::new(),
    };
    write_outputs(
        dir,
        &[
            ("snapshots.csv", output::snapshots_csv_2d(&snaps)),
            ("meta.json", output::meta_json(&meta)),
        ],
    )?;
    Ok(Vec::new())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConvergenceMeta {
    command: String,
    manufactured: String,
    kernel_scale: f64,
    rho: f64,
    a2_mode: String,
    domain: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    temporal_fitted_order: Option<f64>,
    warnings: Vec<String>,
}

/// `nlwave convergence <config>`: manufactured-solution sweeps, emitting
/// convergence.csv with a fitted-order summary line for the temporal axis.
pub fn cmd_convergence(config_path: &Path, out_override: Option<&Path>, quiet: bool) -> i32 {
    let cfg: ConvergenceConfig = match load_json(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    if let Err(e) = cfg.validate() {
        return report_error(&e);
    }
    let dir = resolve_out_dir(cfg.output.as_ref(), out_override);
    let spec = match cfg.kernel.build("kernel") {
        Ok(s) => s,
        Err(e) => return report_error(&e),
    };
    let ms = Manufactured::by_id(&cfg.manufactured).expect("validated");
    let interval = (cfg.domain.lo, cfg.domain.hi);
    let a2_mode = cfg
        .a2_mode
        .as_deref()
        .map(|m| parse_a2_mode(m, "a2Mode").expect("validated"))
        .unwrap_or(assembly::A2Mode::ExactMass);

    let mut reports = Vec::new();
    if let Some(sp) = &cfg.spatial {
        let sweep = analysis::SpatialSweep { ns: sp.ns.clone(), dt: sp.dt, t_end: sp.t_end };
        match analysis::spatial_study(&ms, &spec, cfg.rho, interval, &sweep, a2_mode) {
            Ok(rep) => reports.push(rep),
            Err(e) => return report_error(&e),
        }
    }
    if let Some(tp) = &cfg.temporal {
        let sweep = analysis::TemporalSweep {
            n: tp.n,
            dts: tp.dts.clone(),
            t_end: tp.t_end,
            scheme: parse_scheme(&tp.scheme, "temporal.scheme").expect("validated"),
        };
        match analysis::temporal_study(&ms, &spec, cfg.rho, interval, &sweep, a2_mode) {
            Ok(rep) => reports.push(rep),
            Err(e) => return report_error(&e),
        }
    }

    let fitted = reports.iter().find_map(|r| r.fitted_order);
    let meta = ConvergenceMeta {
        command: "convergence".into(),
        manufactured: cfg.manufactured.clone(),
        kernel_scale: spec.scale(),
        rho: cfg.rho,
        a2_mode: match a2_mode {
            assembly::A2Mode::UnitMass => "unitMass".into(),
            assembly::A2Mode::ExactMass => "exactMass".into(),
        },
        domain: [cfg.domain.lo, cfg.domain.hi],
        temporal_fitted_order: fitted,
        warnings: Vec::new(),
    };
    let refs: Vec<&analysis::ConvergenceReport> = reports.iter().collect();
    let mut meta_text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    meta_text.push('\n');
    if let Err(e) = write_outputs(
        &dir,
        &[
            ("convergence.csv", output::convergence_csv(&refs)),
            ("meta.json", meta_text),
        ],
    ) {
        return report_error(&e);
    }
    if !quiet {
        if let Some(order) = fitted {
            println!("temporal fitted order: {order:.3}");
        }
        println!("wrote {}", dir.join("convergence.csv").display());
    }
    EXIT_OK
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StabilityMeta {
    command: String,
    kernel_scale: f64,
    rho: f64,
    a2_mode: String,
    ns: Vec<usize>,
    dts: Vec<f64>,
    schemes: Vec<String>,
    overall_pass: bool,
    warnings: Vec<String>,
}

/// `nlwave stability <config>`: companion spectral radii per
/// (scheme, N, dt). Any radius of an unconditionally stable scheme above
/// 1 + 1e-8 is a FAIL row and drives exit code 1.
pub fn cmd_stability(config_path: &Path, out_override: Option<&Path>, quiet: bool) -> i32 {
    let cfg: StabilityConfig = match load_json(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    if let Err(e) = cfg.validate() {
        return report_error(&e);
    }
    let dir = resolve_out_dir(cfg.output.as_ref(), out_override);
    let spec = match cfg.kernel.build("kernel") {
        Ok(s) => s,
        Err(e) => return report_error(&e),
    };
    let (lo, hi) = (cfg.domain.lo, cfg.domain.hi);
    let a2_mode = cfg
        .a2_mode
        .as_deref()
        .map(|m| parse_a2_mode(m, "a2Mode").expect("validated"))
        .unwrap_or(assembly::A2Mode::ExactMass);
    let schemes = cfg.schemes_parsed();

    let mut rows = Vec::new();
    let mut overall_pass = true;
    for &n in &cfg.ns {
        let system = match assembly::default_rule(&spec, n, lo, hi)
            .and_then(|rule| assembly::build_system(&spec, n, cfg.rho, |_, _| 0.0, a2_mode, rule))
        {
            Ok(s) => s,
            Err(e) => return report_error(&e),
        };
        for &scheme in &schemes {
            for &dt in &cfg.dts {
                let rep = evolve::spectral_radius_report(&system, dt, scheme);
                let status = match scheme {
                    Scheme::ExplicitCentral => "INFO",
                    Scheme::PaperImplicit | Scheme::AveragedImplicit => {
                        if rep.radius <= 1.0 + STABILITY_TOLERANCE {
                            "PASS"
                        } else {
                            overall_pass = false;
                            "FAIL"
                        }
                    }
                };
                rows.push(StabilityRow {
                    scheme: scheme.name(),
                    degree: n,
                    dt,
                    radius: rep.radius,
                    status,
                });
            }
        }
    }

    let meta = StabilityMeta {
        command: "stability".into(),
        kernel_scale: spec.scale(),
        rho: cfg.rho,
        a2_mode: match a2_mode {
            assembly::A2Mode::UnitMass => "unitMass".into(),
            assembly::A2Mode::ExactMass => "exactMass".into(),
        },
        ns: cfg.ns.clone(),
        dts: cfg.dts.clone(),
        schemes: schemes.iter().map(|s| s.name().to_string()).collect(),
        overall_pass,
        warnings: Vec::new(),
    };
    let mut meta_text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    meta_text.push('\n');
    if let Err(e) = write_outputs(
        &dir,
        &[
            ("stability.csv", output::stability_csv(&rows, overall_pass)),
            ("meta.json", meta_text),
        ],
    ) {
        return report_error(&e);
    }
    if !quiet {
        println!(
            "stability: {} rows, {}",
            rows.len(),
            if overall_pass { "PASS" } else { "FAIL" }
        );
    }
    if overall_pass {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAIL
    }
}

enum BuiltSolver {
    Galerkin { system: Box<AssembledSystem>, scheme: Scheme },
    Collocation { spec: KernelSpec, grid: CollocationGrid, scheme: Scheme },
}

fn build_compare_solver(
    block: &CompareSolverConfig,
    problem: &CompareProblemConfig,
    field: &str,
) -> Result<BuiltSolver, Error> {
    let (lo, hi) = (problem.domain.lo, problem.domain.hi);
    let spec = problem.kernel.build("problem.kernel")?;
    let scheme = block
        .scheme
        .as_deref()
        .map(|s| parse_scheme(s, &format!("{field}.scheme")).expect("validated"))
        .unwrap_or(Scheme::PaperImplicit);
    match block.solver.as_str() {
        "galerkin" => {
            let n = block.degree.expect("validated");
            let a2_mode = block
                .a2_mode
                .as_deref()
                .map(|m| parse_a2_mode(m, &format!("{field}.a2Mode")).expect("validated"))
                .unwrap_or(assembly::A2Mode::ExactMass);
            let (rule, _, _) = galerkin_rule(&spec, n, lo, hi, block.quadrature.as_ref())?;
            let g = problem.g.function().expect("validated");
            let system = Box::new(assembly::build_system(&spec, n, problem.rho, g, a2_mode, rule)?);
            Ok(BuiltSolver::Galerkin { system, scheme })
        }
        "collocation1d" => {
            let grid = grid_from_config(
                block.grid.as_ref().expect("validated"),
                lo,
                hi,
                spec.periodization().is_some(),
            )?;
            Ok(BuiltSolver::Collocation { spec, grid, scheme })
        }
        _ => unreachable!("validated"),
    }
}

fn run_compare_solver(
    solver: &BuiltSolver,
    problem: &CompareProblemConfig,
    sample_grid: &[f64],
) -> Result<Vec<Snapshot>, Error> {
    let (lo, hi) = (problem.domain.lo, problem.domain.hi);
    let u0 = problem.u0.function_1d("problem.u0", (lo, hi))?;
    let v0 = problem.v0.function_1d("problem.v0", (lo, hi))?;
    match solver {
        BuiltSolver::Galerkin { system, scheme } => evolve::run(
            system,
            u0,
            v0,
            problem.dt,
            problem.t_end,
            *scheme,
            sample_grid,
            &problem.snapshot_times,
        ),
        BuiltSolver::Collocation { spec, grid, scheme } => {
            let g = problem.g.function().expect("validated");
            collocation::run_collocation_1d(
                spec,
                grid,
                problem.rho,
                g,
                u0,
                v0,
                problem.dt,
                problem.t_end,
                *scheme,
                &problem.snapshot_times,
            )
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CompareMeta {
    command: String,
    solver_a: String,
    solver_b: String,
    sample_points: usize,
    max_err_linf: f64,
    warnings: Vec<String>,
}

/// `nlwave compare <config>`: solve one problem with two solver blocks and
/// emit the per-snapshot disagreement norms.
pub fn cmd_compare(config_path: &Path, out_override: Option<&Path>, quiet: bool) -> i32 {
    let cfg: CompareConfig = match load_json(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    if let Err(e) = cfg.validate() {
        return report_error(&e);
    }
    let dir = resolve_out_dir(cfg.output.as_ref(), out_override);

    let solver_a = match build_compare_solver(&cfg.solver_a, &cfg.problem, "solverA") {
        Ok(s) => s,
        Err(e) => return report_error(&e),
    };
    let solver_b = match build_compare_solver(&cfg.solver_b, &cfg.problem, "solverB") {
        Ok(s) => s,
        Err(e) => return report_error(&e),
    };

    // comparison grid: collocation reports nodal values only, so its nodes
    // win; two collocation blocks must share the same grid
    let sample_grid: Vec<f64> = match (&solver_a, &solver_b) {
        (BuiltSolver::Galerkin { .. }, BuiltSolver::Galerkin { .. }) => {
            let pts = cfg.sample_grid.as_ref().map(|s| s.points).unwrap_or(201);
            evolve::uniform_grid(cfg.problem.domain.lo, cfg.problem.domain.hi, pts)
        }
        (BuiltSolver::Collocation { grid, .. }, BuiltSolver::Galerkin { .. }) => grid.points.clone(),
        (BuiltSolver::Galerkin { .. }, BuiltSolver::Collocation { grid, .. }) => grid.points.clone(),
        (BuiltSolver::Collocation { grid: ga, .. }, BuiltSolver::Collocation { grid: gb, .. }) => {
            if ga.len() != gb.len()
                || ga.points.iter().zip(&gb.points).any(|(&x, &y)| (x - y).abs() > 1e-12)
            {
                return report_error(&Error::InvalidConfig(
                    "solverB.grid: collocation grids differ; comparison needs a shared grid".into(),
                ));
            }
            ga.points.clone()
        }
    };

    let snaps_a = match run_compare_solver(&solver_a, &cfg.problem, &sample_grid) {
        Ok(s) => s,
        Err(e) => return report_error(&e),
    };
    let snaps_b = match run_compare_solver(&solver_b, &cfg.problem, &sample_grid) {
        Ok(s) => s,
        Err(e) => return report_error(&e),
    };

    let mut rows = Vec::with_capacity(snaps_a.len());
    let mut max_linf = 0.0f64;
    for (a, b) in snaps_a.iter().zip(&snaps_b) {
        let (l2, linf) = match analysis::error_norms(a, b) {
            Ok(n) => n,
            Err(e) => return report_error(&e),
        };
        max_linf = max_linf.max(linf);
        rows.push((a.t, l2, linf));
    }

    let describe = |s: &BuiltSolver| match s {
        BuiltSolver::Galerkin { system, .. } => format!("galerkin(N={})", system.degree()),
        BuiltSolver::Collocation { grid, .. } => format!("collocation1d({} nodes)", grid.len()),
    };
    let meta = CompareMeta {
        command: "compare".into(),
        solver_a: describe(&solver_a),
        solver_b: describe(&solver_b),
        sample_points: sample_grid.len(),
        max_err_linf: max_linf,
        warnings: Vec::new(),
    };
    let mut meta_text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    meta_text.push('\n');
    if let Err(e) = write_outputs(
        &dir,
        &[
            ("compare.csv", output::compare_csv(&rows)),
            ("meta.json", meta_text),
        ],
    ) {
        return report_error(&e);
    }
    if !quiet {
        println!("max Linf disagreement: {max_linf:.3e}");
        println!("wrote {}", dir.join("compare.csv").display());
    }
    EXIT_OK
}
