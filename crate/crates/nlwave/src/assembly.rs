//! Assembly of the semi-discrete Galerkin system M a'' = A a + b(t).
//!
//! M is the diagonal of Legendre norms 2/(2k+1). The stiffness splits into
//! A = rho * (A1 - A2): A1 discretizes the convolution term through a double
//! quadrature sum, A2 the local multiplier term. Both blocks are stored
//! positive; negative semi-definiteness of A1 - A2 is exact at the discrete
//! level when both blocks share one quadrature rule, because then
//! v' (A1 - A2) v = -1/2 sum_lm w_l w_m J(x_l - x_m) (phi(x_l) - phi(x_m))^2.
//!
//! On an interval of width h the inner products are normalized by h/2 so the
//! mass diagonal stays 2/(2k+1) regardless of the interval; on [-1, 1] this
//! reduces to the plain L2 inner product.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::basis::{self, composite_gauss_rule, QuadratureRule};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// How the local multiplier block A2 is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A2Mode {
    /// Assume the kernel mass over the domain is identically 1, giving
    /// A2 = diag(2/(2k+1)) exactly. Reproduces the simplified scheme; the
    /// assumption fails near the edges of a truncated domain.
    UnitMass,
    /// Compute the kernel mass c(x) by quadrature with the same rule as A1.
    /// Preserves exact discrete dissipativity and keeps constants in the
    /// kernel of the operator.
    ExactMass,
}

/// Shared load evaluator type: t -> b(t).
pub type LoadFn = Arc<dyn Fn(f64) -> Array1<f64> + Send + Sync>;

/// The assembled semi-discrete system.
#[derive(Clone)]
pub struct AssembledSystem {
    degree: usize,
    rho: f64,
    interval: (f64, f64),
    mass_diag: Array1<f64>,
    a1: Array2<f64>,
    a2: Array2<f64>,
    op: Array2<f64>,
    a2_mode: A2Mode,
    rule: QuadratureRule,
    kernel: KernelSpec,
    load: LoadFn,
}

impl std::fmt::Debug for AssembledSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AssembledSystem")
            .field("degree", &self.degree)
            .field("rho", &self.rho)
            .field("interval", &self.interval)
            .field("a2_mode", &self.a2_mode)
            .field("rule_points", &self.rule.len())
            .finish()
    }
}

impl AssembledSystem {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Mass diagonal m_k = 2/(2k+1).
    pub fn mass_diag(&self) -> &Array1<f64> {
        &self.mass_diag
    }

    pub fn a1(&self) -> &Array2<f64> {
        &self.a1
    }

    pub fn a2(&self) -> &Array2<f64> {
        &self.a2
    }

    /// The full operator A = rho * (A1 - A2).
    pub fn operator(&self) -> &Array2<f64> {
        &self.op
    }

    pub fn a2_mode(&self) -> A2Mode {
        self.a2_mode
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// Load vector b(t).
    pub fn load_at(&self, t: f64) -> Array1<f64> {
        (self.load)(t)
    }

    pub fn load_fn(&self) -> LoadFn {
        Arc::clone(&self.load)
    }

    /// Evaluate the expansion at physical points.
    pub fn sample(&self, coeffs: &Array1<f64>, xs: &[f64]) -> Vec<f64> {
        let refs: Vec<f64> = xs.iter().map(|&x| basis::to_reference(self.interval, x)).collect();
        basis::synthesize(coeffs, &refs)
    }

    /// Project a physical-space function onto the basis.
    pub fn project<F: Fn(f64) -> f64>(&self, f: F) -> Result<Array1<f64>> {
        basis::project(f, self.degree, &self.rule)
    }
}

/// Mass diagonal entries 2/(2k+1) for k = 0..=n.
pub fn mass_diagonal(n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n + 1, |k| 2.0 / (2 * k + 1) as f64)
}

/// Points-per-panel and panel count of the default assembly rule.
pub fn default_rule_params(spec: &KernelSpec, n: usize, lo: f64, hi: f64) -> (usize, usize) {
    let width = hi - lo;
    let points = (2 * n + 2).max(64);
    let mut panels = if spec.scale() * width * width > 1e4 { 8 } else { 1 };
    // at least ~3 nodes per kernel width in each panel
    let needed = (3.0 * width / (spec.width() * points as f64)).ceil().max(1.0) as usize;
    panels = panels.max(needed.next_power_of_two());
    (points, panels)
}

/// Default assembly rule for a kernel on [lo, hi]: composite Gauss with
/// max(2N+2, 64) points per panel. The panel count rises for sharp kernels
/// so the nodes resolve the kernel width (the polynomial factors alone only
/// need N+1 points, but under-resolving J makes the computed kernel mass
/// overshoot 1 and breaks the discrete operator-norm bound).
pub fn default_rule(spec: &KernelSpec, n: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    let (points, panels) = default_rule_params(spec, n, lo, hi);
    composite_gauss_rule(points, panels, lo, hi)
}

/// Quadrature context shared by the A1/A2 assembly: basis values at the
/// mapped nodes, weighted basis values, and the kernel half-product
/// T = J W P whose first column is the kernel mass c at the nodes.
struct AssemblyTables {
    /// P[l][k] = L_k(xi_l)
    p: Array2<f64>,
    /// wp[l][k] = w_l * P[l][k]
    wp: Array2<f64>,
    /// t[l][j] = sum_m J(x_l - x_m) wp[m][j]
    t: Array2<f64>,
    /// normalization 2/h for the interval inner product
    norm: f64,
}

fn assembly_tables(spec: &KernelSpec, n: usize, rule: &QuadratureRule) -> Result<AssemblyTables> {
    if rule.len() < n + 1 {
        return Err(Error::RuleTooCoarse { points: rule.len(), required: n + 1 });
    }
    let m = rule.len();
    let (lo, hi) = rule.interval();
    let norm = 2.0 / (hi - lo);

    let mut p = Array2::zeros((m, n + 1));
    let mut wp = Array2::zeros((m, n + 1));
    for (l, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        let vals = basis::legendre_eval_all(n, basis::to_reference((lo, hi), x));
        for k in 0..=n {
            p[[l, k]] = vals[k];
            wp[[l, k]] = w * vals[k];
        }
    }

    let nodes = rule.nodes();
    let mut jrow = vec![0.0f64; m];
    let mut t = Array2::zeros((m, n + 1));
    for l in 0..m {
        for (mm, &y) in nodes.iter().enumerate() {
            jrow[mm] = spec.eval(nodes[l] - y);
        }
        for j in 0..=n {
            let mut s = 0.0;
            for (mm, &jv) in jrow.iter().enumerate() {
                s += jv * wp[[mm, j]];
            }
            t[[l, j]] = s;
        }
    }
    Ok(AssemblyTables { p, wp, t, norm })
}

/// Double-quadrature convolution block:
/// (A1)_kj = (2/h) sum_l sum_m w_l L_k(xi_l) J(x_l - x_m) w_m L_j(xi_m).
pub fn assemble_a1(spec: &KernelSpec, n: usize, rule: &QuadratureRule) -> Result<Array2<f64>> {
    let tbl = assembly_tables(spec, n, rule)?;
    Ok(a1_from_tables(&tbl, n, rule.len()))
}

fn a1_from_tables(tbl: &AssemblyTables, n: usize, m: usize) -> Array2<f64> {
    let mut a1 = Array2::zeros((n + 1, n + 1));
    for k in 0..=n {
        for j in 0..=n {
            let mut s = 0.0;
            for l in 0..m {
                s += tbl.wp[[l, k]] * tbl.t[[l, j]];
            }
            a1[[k, j]] = tbl.norm * s;
        }
    }
    a1
}

/// Local multiplier block. UnitMass gives diag(2/(2k+1)) exactly; ExactMass
/// uses the node-wise kernel mass c(x_l) from the same rule as A1, taken from
/// the first column of the shared half-product so that constants lie in the
/// kernel of A1 - A2 to the last bit.
pub fn assemble_a2(
    mode: A2Mode,
    spec: &KernelSpec,
    n: usize,
    rule: &QuadratureRule,
) -> Result<Array2<f64>> {
    if rule.len() < n + 1 {
        return Err(Error::RuleTooCoarse { points: rule.len(), required: n + 1 });
    }
    match mode {
        A2Mode::UnitMass => Ok(Array2::from_diag(&mass_diagonal(n))),
        A2Mode::ExactMass => {
            let tbl = assembly_tables(spec, n, rule)?;
            Ok(a2_exact_from_tables(&tbl, n, rule.len()))
        }
    }
}

fn a2_exact_from_tables(tbl: &AssemblyTables, n: usize, m: usize) -> Array2<f64> {
    let mut a2 = Array2::zeros((n + 1, n + 1));
    for k in 0..=n {
        for j in 0..=n {
            let mut s = 0.0;
            for l in 0..m {
                // c(x_l) is t[l][0]; P[l][0] = 1 exactly, so column 0 of
                // this product reproduces column 0 of A1 bit for bit
                s += tbl.wp[[l, k]] * (tbl.t[[l, 0]] * tbl.p[[l, j]]);
            }
            a2[[k, j]] = tbl.norm * s;
        }
    }
    a2
}

/// Forcing projection b_k(t) = (2/h) sum_l w_l g(x_l, t) L_k(xi_l).
pub fn assemble_load<G: Fn(f64, f64) -> f64>(
    g: G,
    t: f64,
    n: usize,
    rule: &QuadratureRule,
) -> Array1<f64> {
    let (lo, hi) = rule.interval();
    let norm = 2.0 / (hi - lo);
    let mut b = Array1::zeros(n + 1);
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let gval = g(x, t);
        let vals = basis::legendre_eval_all(n, basis::to_reference((lo, hi), x));
        for k in 0..=n {
            b[k] += w * gval * vals[k];
        }
    }
    b.mapv_inplace(|v| v * norm);
    b
}

/// Build the full system. Construction is deterministic given its inputs.
pub fn build_system<G>(
    spec: &KernelSpec,
    n: usize,
    rho: f64,
    g: G,
    mode: A2Mode,
    rule: QuadratureRule,
) -> Result<AssembledSystem>
where
    G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    let tbl = assembly_tables(spec, n, &rule)?;
    let m = rule.len();
    let a1 = a1_from_tables(&tbl, n, m);
    let a2 = match mode {
        A2Mode::UnitMass => Array2::from_diag(&mass_diagonal(n)),
        A2Mode::ExactMass => a2_exact_from_tables(&tbl, n, m),
    };
    let op = (&a1 - &a2).mapv(|v| rho * v);

    let load_rule = rule.clone();
    let load: LoadFn = Arc::new(move |t: f64| assemble_load(&g, t, n, &load_rule));

    Ok(AssembledSystem {
        degree: n,
        rho,
        interval: rule.interval(),
        mass_diag: mass_diagonal(n),
        a1,
        a2,
        op,
        a2_mode: mode,
        rule,
        kernel: spec.clone(),
        load,
    })
}
