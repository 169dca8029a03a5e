//! Legendre polynomials, Gauss-Legendre quadrature, and the projection /
//! synthesis pair between functions and coefficient space.
//!
//! The canonical basis lives on [-1, 1]; rules on other intervals map node
//! positions affinely and scale weights, and projection maps sample points
//! back to the reference interval before evaluating the basis.

use ndarray::Array1;

use crate::error::{Error, Result};

/// Newton update tolerance for Gauss node root-finding.
const NODE_TOL: f64 = 1e-15;
/// Iteration cap for the node root-finding. Newton from the Chebyshev-like
/// initial guesses converges in a handful of steps for any n <= 512.
const NODE_MAX_ITER: usize = 100;

/// Legendre coefficients a_0..a_N of a function on the reference interval.
pub type CoefficientVector = Array1<f64>;

/// Gauss-Legendre nodes and weights on an interval.
///
/// Nodes are strictly increasing and interior; weights are positive and sum
/// to the interval length. On a symmetric interval the nodes and weights are
/// symmetric under x -> -x.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: (f64, f64),
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` with this rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// The same point layout remapped affinely onto [lo, hi].
    pub fn remapped(&self, lo: f64, hi: f64) -> QuadratureRule {
        let (a, b) = self.interval;
        if lo == a && hi == b {
            return self.clone();
        }
        let scale = (hi - lo) / (b - a);
        let nodes = self
            .nodes
            .iter()
            .map(|&x| lo + (x - a) * scale)
            .collect();
        let weights = self.weights.iter().map(|&w| w * scale).collect();
        QuadratureRule { nodes, weights, interval: (lo, hi) }
    }
}

/// Evaluate the Legendre polynomial L_n(x) by the three-term recurrence
/// from L_0 = 1, L_1 = x. Arguments outside [-1, 1] are accepted and give
/// the polynomial's extrapolation.
pub fn legendre_eval(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * curr - k as f64 * prev) / (k + 1) as f64;
        prev = curr;
        curr = next;
    }
    curr
}

/// All of L_0(x)..L_n(x) in one recurrence pass.
pub fn legendre_eval_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(x);
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * out[k] - k as f64 * out[k - 1]) / (k + 1) as f64;
        out.push(next);
    }
    out
}

/// L_n(x) and its derivative, sharing one recurrence pass.
pub fn legendre_eval_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut curr = x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * curr - k as f64 * prev) / (k + 1) as f64;
        prev = curr;
        curr = next;
    }
    // derivative from L_n and L_{n-1}; at |x| = 1 use the boundary value
    let deriv = if (x * x - 1.0).abs() < 1e-30 {
        let sign = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) };
        sign * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * curr - prev) / (x * x - 1.0)
    };
    (curr, deriv)
}

/// n-point Gauss-Legendre rule mapped affinely to [lo, hi]. Exact for all
/// polynomials of degree <= 2n-1.
///
/// Nodes are Newton-refined roots of L_n from the initial guesses
/// cos(pi (4i - 1) / (4n + 2)); each +-pair is assigned from one root so the
/// reference rule is exactly symmetric.
pub fn gauss_rule(n: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    assert!(n >= 1, "gauss_rule requires n >= 1");
    assert!(lo < hi, "gauss_rule requires lo < hi");

    let mut ref_nodes = vec![0.0f64; n];
    let mut ref_weights = vec![0.0f64; n];

    let half = n / 2;
    for i in 0..half {
        // i-th positive root, largest first
        let guess = (std::f64::consts::PI * (4 * (i + 1) - 1) as f64 / (4 * n + 2) as f64).cos();
        let (root, deriv) = newton_legendre_root(n, guess)?;
        let w = 2.0 / ((1.0 - root * root) * deriv * deriv);
        ref_nodes[n - 1 - i] = root;
        ref_weights[n - 1 - i] = w;
        ref_nodes[i] = -root;
        ref_weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, deriv) = legendre_eval_deriv(n, 0.0);
        ref_nodes[half] = 0.0;
        ref_weights[half] = 2.0 / (deriv * deriv);
    }

    let center = 0.5 * (lo + hi);
    let half_width = 0.5 * (hi - lo);
    let nodes: Vec<f64> = ref_nodes.iter().map(|&x| center + half_width * x).collect();
    let weights: Vec<f64> = ref_weights.iter().map(|&w| half_width * w).collect();
    Ok(QuadratureRule { nodes, weights, interval: (lo, hi) })
}

fn newton_legendre_root(n: usize, guess: f64) -> Result<(f64, f64)> {
    let mut x = guess;
    for _ in 0..NODE_MAX_ITER {
        let (p, dp) = legendre_eval_deriv(n, x);
        let delta = p / dp;
        x -= delta;
        if delta.abs() <= NODE_TOL {
            let (_, dp) = legendre_eval_deriv(n, x);
            return Ok((x, dp));
        }
    }
    Err(Error::NonConvergence { what: "gauss node root-finding", iterations: NODE_MAX_ITER })
}

/// Composite rule: `panels` equal subintervals of [lo, hi], each carrying a
/// `points`-point Gauss rule. Nodes stay ascending across panel boundaries.
pub fn composite_gauss_rule(points: usize, panels: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    assert!(panels >= 1, "composite rule requires at least one panel");
    let mut nodes = Vec::with_capacity(points * panels);
    let mut weights = Vec::with_capacity(points * panels);
    let width = (hi - lo) / panels as f64;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let b = if p + 1 == panels { hi } else { lo + (p + 1) as f64 * width };
        let rule = gauss_rule(points, a, b)?;
        nodes.extend_from_slice(rule.nodes());
        weights.extend_from_slice(rule.weights());
    }
    Ok(QuadratureRule { nodes, weights, interval: (lo, hi) })
}

/// Map a physical point on `interval` to the reference interval [-1, 1].
pub fn to_reference(interval: (f64, f64), x: f64) -> f64 {
    (2.0 * x - interval.0 - interval.1) / (interval.1 - interval.0)
}

/// Legendre coefficients of `f` up to degree `n`, computed with the given
/// rule: a_k = (2k+1)/2 * sum_l w_l f(x_l) L_k(xi_l), with nodes mapped to
/// the reference interval for the basis evaluation and the weights
/// normalized by the interval half-width.
pub fn project<F: Fn(f64) -> f64>(f: F, n: usize, rule: &QuadratureRule) -> Result<CoefficientVector> {
    if rule.len() < n + 1 {
        return Err(Error::RuleTooCoarse { points: rule.len(), required: n + 1 });
    }
    let (lo, hi) = rule.interval();
    let half_width = 0.5 * (hi - lo);
    let mut coeffs = Array1::zeros(n + 1);
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let fx = f(x);
        let basis = legendre_eval_all(n, to_reference((lo, hi), x));
        for k in 0..=n {
            coeffs[k] += w * fx * basis[k];
        }
    }
    for k in 0..=n {
        coeffs[k] *= (2 * k + 1) as f64 / (2.0 * half_width);
    }
    Ok(coeffs)
}

/// Evaluate sum_k a_k L_k(x) at each reference-interval point in `xs`.
pub fn synthesize(coeffs: &CoefficientVector, xs: &[f64]) -> Vec<f64> {
    let n = coeffs.len().saturating_sub(1);
    xs.iter()
        .map(|&x| {
            let basis = legendre_eval_all(n, x);
            basis.iter().zip(coeffs.iter()).map(|(b, a)| a * b).sum()
        })
        .collect()
}
