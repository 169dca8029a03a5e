//! The analysis harness: Taylor-moment reduction to the local wave limit,
//! manufactured-solution convergence studies, error norms, and norm-bound
//! reporting for assembled systems.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::assembly::{self, A2Mode, AssembledSystem};
use crate::basis::{self, composite_gauss_rule};
use crate::error::{Error, Result};
use crate::evolve::{self, Scheme, Snapshot};
use crate::kernel::{self, KernelSpec};
use crate::linalg;

/// Taylor moment coefficients C_2m = rho / (2m)! * integral z^2m J(z) dz.
/// C_2 is the effective wave-speed-squared coefficient of the local limit
/// u_tt = C_2 u_xx + g.
#[derive(Debug, Clone)]
pub struct MomentTable {
    /// C_2, C_4, ... indexed by m - 1.
    pub coefficients: Vec<f64>,
    /// Largest odd-moment magnitude, a symmetry check; vanishes to roundoff.
    pub max_odd_moment: f64,
    pub rho: f64,
    /// Kernel width the table was computed for.
    pub kernel_width: f64,
}

/// Compute the moment table by quadrature over [-A, A] with
/// A = truncation_radius(delta, 1e-15).
pub fn taylor_coefficients(spec: &KernelSpec, rho: f64, m_max: usize) -> Result<MomentTable> {
    assert!(m_max >= 1);
    let delta = spec.width();
    let a = kernel::truncation_radius(delta, 1e-15)?;
    let rule = composite_gauss_rule(24, 16, -a, a)?;

    let mut coefficients = Vec::with_capacity(m_max);
    let mut factorial = 1.0f64; // (2m)!
    let mut max_odd = 0.0f64;
    for m in 1..=m_max {
        factorial *= (2 * m - 1) as f64 * (2 * m) as f64;
        let even = rule.integrate(|z| z.powi(2 * m as i32) * spec.eval(z));
        coefficients.push(rho / factorial * even);
        let odd = rule.integrate(|z| z.powi(2 * m as i32 - 1) * spec.eval(z));
        max_odd = max_odd.max(odd.abs());
    }
    Ok(MomentTable { coefficients, max_odd_moment: max_odd, rho, kernel_width: delta })
}

/// Second-order central-difference solution of the local wave equation
/// u_tt = C_2 u_xx + g on [lo, hi] with homogeneous Neumann boundaries,
/// used as a comparison target for narrow kernels.
///
/// The grid has nx + 1 uniform points. Fails with `CflViolation` when
/// sqrt(C_2) dt / h exceeds 1.
#[allow(clippy::too_many_arguments)]
pub fn local_reference<F1, F2, G>(
    c2: f64,
    u0: F1,
    v0: F2,
    g: G,
    lo: f64,
    hi: f64,
    nx: usize,
    dt: f64,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<Vec<Snapshot>>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    assert!(c2 >= 0.0, "C_2 must be nonnegative");
    assert!(nx >= 2);
    let h = (hi - lo) / nx as f64;
    let courant = c2.sqrt() * dt / h;
    if courant > 1.0 + 1e-12 {
        return Err(Error::CflViolation { courant });
    }
    let indices = evolve::snapshot_steps(snapshot_times, dt, t_end)?;
    let mut wanted = indices;
    wanted.sort_unstable();
    wanted.dedup();

    let xs: Vec<f64> = (0..=nx).map(|i| lo + i as f64 * h).collect();
    let npts = nx + 1;
    let lap = |u: &[f64], i: usize| -> f64 {
        // mirror ghosts give the Neumann condition
        let left = if i == 0 { u[1] } else { u[i - 1] };
        let right = if i == nx { u[nx - 1] } else { u[i + 1] };
        (left - 2.0 * u[i] + right) / (h * h)
    };

    let u_init: Vec<f64> = xs.iter().map(|&x| u0(x)).collect();
    let mut out: Vec<Snapshot> = Vec::with_capacity(wanted.len());

    let mut next_idx = 0;
    if wanted.first() == Some(&0) {
        out.push(Snapshot { t: 0.0, xs: xs.clone(), us: u_init.clone() });
        next_idx += 1;
    }
    let last = wanted.last().copied().unwrap_or(0);
    if last == 0 {
        return Ok(out);
    }

    let mut u_prev = u_init;
    let mut u_curr: Vec<f64> = (0..npts)
        .map(|i| {
            u_prev[i] + dt * v0(xs[i]) + 0.5 * dt * dt * (c2 * lap(&u_prev, i) + g(xs[i], 0.0))
        })
        .collect();
    let mut step = 1usize;
    loop {
        if next_idx < wanted.len() && wanted[next_idx] == step {
            out.push(Snapshot { t: step as f64 * dt, xs: xs.clone(), us: u_curr.clone() });
            next_idx += 1;
        }
        if step >= last {
            break;
        }
        let tj = step as f64 * dt;
        let u_next: Vec<f64> = (0..npts)
            .map(|i| 2.0 * u_curr[i] - u_prev[i] + dt * dt * (c2 * lap(&u_curr, i) + g(xs[i], tj)))
            .collect();
        u_prev = u_curr;
        u_curr = u_next;
        step += 1;
    }
    Ok(out)
}

/// A manufactured exact solution u*(x, t). The caller supplies the second
/// time derivative and the initial velocity in closed form; the induced
/// forcing g = u*_tt - rho L u* is computed here by reference quadrature.
#[derive(Clone)]
pub struct Manufactured {
    pub name: &'static str,
    pub u: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub u_tt: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub v0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Manufactured {
    /// u*(x, t) = exp(-9 x^2) cos(t): smooth in space, oscillatory in time.
    pub fn gauss_cosine() -> Manufactured {
        Manufactured {
            name: "gaussCosine",
            u: Arc::new(|x, t| (-9.0 * x * x).exp() * t.cos()),
            u_tt: Arc::new(|x, t| -(-9.0f64 * x * x).exp() * t.cos()),
            v0: Arc::new(|_| 0.0),
        }
    }

    /// u*(x, t) = (1 + x + x^2)(1 + t + t^2/2): polynomial of degree 2 in
    /// both variables, so degree >= 2 discretizations resolve it to roundoff.
    pub fn poly_quadratic() -> Manufactured {
        let q = |x: f64| 1.0 + x + x * x;
        Manufactured {
            name: "polyQuadratic",
            u: Arc::new(move |x, t| q(x) * (1.0 + t + 0.5 * t * t)),
            u_tt: Arc::new(move |x, _| q(x)),
            v0: Arc::new(q),
        }
    }

    /// Look up a catalogue entry by its config identifier.
    pub fn by_id(id: &str) -> Option<Manufactured> {
        match id {
            "gaussCosine" => Some(Manufactured::gauss_cosine()),
            "polyQuadratic" => Some(Manufactured::poly_quadratic()),
            _ => None,
        }
    }
}

/// Sweep axis of a convergence report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    #[serde(rename = "spatialN")]
    SpatialN,
    #[serde(rename = "temporalDt")]
    TemporalDt,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::SpatialN => "spatialN",
            SweepAxis::TemporalDt => "temporalDt",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceSample {
    pub resolution: f64,
    pub err_l2: f64,
    pub err_linf: f64,
}

/// One sweep of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub axis: SweepAxis,
    pub samples: Vec<ConvergenceSample>,
    /// Least-squares log-log slope; only fitted on the temporal axis, and
    /// only over points above the round-off plateau.
    pub fitted_order: Option<f64>,
}

/// Error points below this sit on the round-off floor and are excluded
/// from order fits.
pub const PLATEAU_FLOOR: f64 = 5e-11;

fn fit_order(samples: &[ConvergenceSample]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.err_l2 > PLATEAU_FLOOR)
        .map(|s| (s.resolution.ln(), s.err_l2.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Spatial sweep: degrees run at one fixed small step. The sweep always
/// uses the explicit central scheme: its order-2 error at `dt` sits below
/// the spectral plateau, which a first-order scheme would mask.
#[derive(Debug, Clone)]
pub struct SpatialSweep {
    pub ns: Vec<usize>,
    pub dt: f64,
    pub t_end: f64,
}

/// Temporal sweep: step sizes run at one fixed large degree.
#[derive(Debug, Clone)]
pub struct TemporalSweep {
    pub n: usize,
    pub dts: Vec<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
}

/// Errors of one Galerkin solve against the manufactured solution at t_end,
/// measured on the reference-rule nodes: quadrature L2 and grid max norm.
#[allow(clippy::too_many_arguments)]
pub fn manufactured_errors(
    ms: &Manufactured,
    spec: &KernelSpec,
    rho: f64,
    interval: (f64, f64),
    n: usize,
    dt: f64,
    t_end: f64,
    scheme: Scheme,
    a2_mode: A2Mode,
) -> Result<(f64, f64)> {
    let (lo, hi) = interval;
    let rule = assembly::default_rule(spec, n, lo, hi)?;
    let system = assembly::build_system(spec, n, rho, |_, _| 0.0, a2_mode, rule.clone())?;

    // forcing g = u*_tt - rho L u*, with L u* evaluated on a composite
    // reference rule carrying 4x the assembly nodes
    let (points, panels) = assembly::default_rule_params(spec, n, lo, hi);
    let ref_rule = composite_gauss_rule(points, 4 * panels, lo, hi)?;
    let xs: Vec<f64> = rule.nodes().to_vec();
    let ys: Vec<f64> = ref_rule.nodes().to_vec();
    let m = xs.len();
    let mref = ys.len();

    // kernel rows against the reference nodes, with the weights folded in
    let mut jw = Array2::zeros((m, mref));
    let mut cvec = Array1::zeros(m);
    for l in 0..m {
        let mut c = 0.0;
        for (mm, (&y, &w)) in ys.iter().zip(ref_rule.weights()).enumerate() {
            let v = w * spec.eval(xs[l] - y);
            jw[[l, mm]] = v;
            c += v;
        }
        cvec[l] = c;
    }

    // weighted basis table for projecting g onto the load vector
    let half_width = 0.5 * (hi - lo);
    let mut wp = Array2::zeros((m, n + 1));
    for (l, (&x, &w)) in xs.iter().zip(rule.weights()).enumerate() {
        let vals = basis::legendre_eval_all(n, basis::to_reference((lo, hi), x));
        for k in 0..=n {
            wp[[l, k]] = w * vals[k];
        }
    }

    let u = Arc::clone(&ms.u);
    let u_tt = Arc::clone(&ms.u_tt);
    let ys_load = ys.clone();
    let xs_load = xs.clone();
    let load: assembly::LoadFn = Arc::new(move |t: f64| {
        let uref: Vec<f64> = ys_load.iter().map(|&y| u(y, t)).collect();
        let mut b = Array1::zeros(n + 1);
        for l in 0..xs_load.len() {
            let x = xs_load[l];
            let mut conv = 0.0;
            for (mm, &uy) in uref.iter().enumerate() {
                conv += jw[[l, mm]] * uy;
            }
            let lu = conv - u(x, t) * cvec[l];
            let gval = u_tt(x, t) - rho * lu;
            for k in 0..=n {
                b[k] += wp[[l, k]] * gval;
            }
        }
        b.mapv_inplace(|v| v / half_width);
        b
    });

    let mut ode = system.ode();
    ode.load = load;

    let u0 = Arc::clone(&ms.u);
    let a0 = system.project(|x| u0(x, 0.0))?;
    let v0 = Arc::clone(&ms.v0);
    let adot0 = system.project(|x| v0(x))?;
    let idx = evolve::snapshot_steps(&[t_end], dt, t_end)?;
    let coeffs = evolve::run_coefficients(&ode, a0, &adot0, dt, scheme, &idx)?;
    let a_final = &coeffs.last().expect("one snapshot requested").1;

    let got = system.sample(a_final, &ys);
    let uexact = Arc::clone(&ms.u);
    let mut l2 = 0.0;
    let mut linf = 0.0f64;
    for (i, (&y, &w)) in ys.iter().zip(ref_rule.weights()).enumerate() {
        let d = got[i] - uexact(y, t_end);
        l2 += w * d * d;
        linf = linf.max(d.abs());
    }
    Ok((l2.sqrt(), linf))
}

/// Run a spatial sweep and report the error decay in N.
pub fn spatial_study(
    ms: &Manufactured,
    spec: &KernelSpec,
    rho: f64,
    interval: (f64, f64),
    sweep: &SpatialSweep,
    a2_mode: A2Mode,
) -> Result<ConvergenceReport> {
    let mut samples = Vec::with_capacity(sweep.ns.len());
    for &n in &sweep.ns {
        let (l2, linf) = manufactured_errors(
            ms,
            spec,
            rho,
            interval,
            n,
            sweep.dt,
            sweep.t_end,
            Scheme::ExplicitCentral,
            a2_mode,
        )?;
        samples.push(ConvergenceSample { resolution: n as f64, err_l2: l2, err_linf: linf });
    }
    Ok(ConvergenceReport { axis: SweepAxis::SpatialN, samples, fitted_order: None })
}

/// Run a temporal sweep and fit the observed order.
pub fn temporal_study(
    ms: &Manufactured,
    spec: &KernelSpec,
    rho: f64,
    interval: (f64, f64),
    sweep: &TemporalSweep,
    a2_mode: A2Mode,
) -> Result<ConvergenceReport> {
    let mut samples = Vec::with_capacity(sweep.dts.len());
    for &dt in &sweep.dts {
        let (l2, linf) = manufactured_errors(
            ms,
            spec,
            rho,
            interval,
            sweep.n,
            dt,
            sweep.t_end,
            sweep.scheme,
            a2_mode,
        )?;
        samples.push(ConvergenceSample { resolution: dt, err_l2: l2, err_linf: linf });
    }
    let fitted = fit_order(&samples);
    Ok(ConvergenceReport { axis: SweepAxis::TemporalDt, samples, fitted_order: fitted })
}

/// Run both sweeps of a manufactured-solution study.
pub fn manufactured_study(
    ms: &Manufactured,
    spec: &KernelSpec,
    rho: f64,
    interval: (f64, f64),
    spatial: &SpatialSweep,
    temporal: &TemporalSweep,
    a2_mode: A2Mode,
) -> Result<(ConvergenceReport, ConvergenceReport)> {
    Ok((
        spatial_study(ms, spec, rho, interval, spatial, a2_mode)?,
        temporal_study(ms, spec, rho, interval, temporal, a2_mode)?,
    ))
}

/// L2 (trapezoidal quadrature on the sample grid) and max-norm difference
/// between two snapshots on the same grid.
pub fn error_norms(a: &Snapshot, b: &Snapshot) -> Result<(f64, f64)> {
    if a.xs.len() != b.xs.len()
        || a.xs.iter().zip(&b.xs).any(|(&x, &y)| (x - y).abs() > 1e-12)
    {
        return Err(Error::GridMismatch);
    }
    let diff: Vec<f64> = a.us.iter().zip(&b.us).map(|(&x, &y)| x - y).collect();
    Ok(grid_norms(&a.xs, &diff))
}

/// Error norms of a snapshot against a reference function.
pub fn error_norms_vs<F: Fn(f64) -> f64>(snap: &Snapshot, reference: F) -> (f64, f64) {
    let diff: Vec<f64> = snap
        .xs
        .iter()
        .zip(&snap.us)
        .map(|(&x, &u)| u - reference(x))
        .collect();
    grid_norms(&snap.xs, &diff)
}

fn grid_norms(xs: &[f64], diff: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mut l2sq = 0.0;
    let mut linf = 0.0f64;
    for i in 0..n {
        let w = match i {
            0 => 0.5 * (xs[1] - xs[0]),
            _ if i == n - 1 => 0.5 * (xs[n - 1] - xs[n - 2]),
            _ => 0.5 * (xs[i + 1] - xs[i - 1]),
        };
        l2sq += w * diff[i] * diff[i];
        linf = linf.max(diff[i].abs());
    }
    (l2sq.sqrt(), linf)
}

/// Measured norms of an assembled system against the ones the stability
/// argument needs: Frobenius bounds on the blocks and the discrete operator
/// norm of M^-1/2 (A1 - A2) M^-1/2.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsReport {
    pub degree: usize,
    pub rho: f64,
    pub a2_mode: String,
    /// K = max of J over the quadrature node differences (J(0) for the
    /// Gaussian).
    pub kernel_peak: f64,
    pub frob_a1: f64,
    pub frob_a2: f64,
    pub frob_a: f64,
    pub frob_mass: f64,
    pub discrete_op_norm: f64,
    pub bound_4nk: f64,
    pub bound_4: f64,
    pub bound_a: f64,
    pub a1_bound_ok: bool,
    /// Checked against 4 only in unit-mass mode, where the block is the
    /// Gram diagonal the bound refers to.
    pub a2_bound_ok: bool,
    pub op_norm_ok: bool,
    pub a_bound_ok: bool,
    pub mass_bound_ok: bool,
}

impl BoundsReport {
    pub fn all_ok(&self) -> bool {
        self.a1_bound_ok && self.a2_bound_ok && self.op_norm_ok && self.a_bound_ok
            && self.mass_bound_ok
    }
}

/// Compute every normed quantity and flag bound violations.
pub fn bounds_report(system: &AssembledSystem) -> BoundsReport {
    let n = system.degree();
    let k_max = system.kernel().peak();
    let frob_a1 = linalg::frobenius_norm(system.a1());
    let frob_a2 = linalg::frobenius_norm(system.a2());
    let frob_a = linalg::frobenius_norm(system.operator());
    let mass = system.mass_diag();
    let frob_mass = mass.iter().map(|m| m * m).sum::<f64>().sqrt();

    let dim = n + 1;
    let mut sym = Array2::zeros((dim, dim));
    for k in 0..dim {
        for j in 0..dim {
            sym[[k, j]] = (system.a1()[[k, j]] - system.a2()[[k, j]]) / (mass[k] * mass[j]).sqrt();
        }
    }
    let op_norm = linalg::symmetric_two_norm(&sym);

    let bound_4nk = 4.0 * (n + 1) as f64 * k_max;
    let bound_a = 4.0 * system.rho() * ((n + 1) as f64 * k_max + 1.0);
    // sum of (2/(2k+1))^2 is below 4 + 4 (pi^2/6 - 1) for every degree
    let mass_upper = (4.0 + 4.0 * (std::f64::consts::PI.powi(2) / 6.0 - 1.0)).sqrt();

    BoundsReport {
        degree: n,
        rho: system.rho(),
        a2_mode: match system.a2_mode() {
            A2Mode::UnitMass => "unitMass".to_string(),
            A2Mode::ExactMass => "exactMass".to_string(),
        },
        kernel_peak: k_max,
        frob_a1,
        frob_a2,
        frob_a,
        frob_mass,
        discrete_op_norm: op_norm,
        bound_4nk,
        bound_4: 4.0,
        bound_a,
        a1_bound_ok: frob_a1 <= bound_4nk,
        a2_bound_ok: system.a2_mode() != A2Mode::UnitMass || frob_a2 < 4.0,
        op_norm_ok: op_norm <= 2.0 + 1e-6,
        a_bound_ok: frob_a <= bound_a,
        mass_bound_ok: (2.0..mass_upper).contains(&frob_mass),
    }
}
