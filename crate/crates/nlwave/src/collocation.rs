//! Quadrature collocation: impose the equation at quadrature points with the
//! convolution replaced by the weighted sum over those points. Serves as an
//! independent discretization of the same problem the Galerkin path solves,
//! which makes cross-method agreement a strong correctness oracle.
//!
//! Grids come in three flavors: one global Gauss rule, a composite rule with
//! K Gauss points on each of N_h equal subdomains (few points per subdomain
//! suffice because the kernel is flatter there), and uniform midpoints. A 2D
//! uniform midpoint scheme on the periodic unit square is included for the
//! torus experiments.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::basis::{gauss_rule, QuadratureRule};
use crate::error::Result;
use crate::evolve::{self, Scheme, SecondOrderOde, Snapshot};
use crate::kernel::KernelSpec;

/// How a collocation grid was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridStructure {
    SingleGauss { points: usize },
    CompositeGauss { subdomains: usize, points: usize },
    UniformMidpoint { cells: usize },
}

/// Collocation points and quadrature weights on an interval.
#[derive(Debug, Clone)]
pub struct CollocationGrid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub structure: GridStructure,
    pub interval: (f64, f64),
    pub periodic: bool,
}

impl CollocationGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Grid carrying one global Gauss rule.
pub fn single_gauss_grid(lo: f64, hi: f64, points: usize) -> Result<CollocationGrid> {
    let rule: QuadratureRule = gauss_rule(points, lo, hi)?;
    Ok(CollocationGrid {
        points: rule.nodes().to_vec(),
        weights: rule.weights().to_vec(),
        structure: GridStructure::SingleGauss { points },
        interval: (lo, hi),
        periodic: false,
    })
}

/// `subdomains` equal subdomains tiling [lo, hi], each with a
/// `points`-point Gauss rule.
pub fn composite_grid(lo: f64, hi: f64, subdomains: usize, points: usize) -> Result<CollocationGrid> {
    assert!(subdomains >= 1 && points >= 1);
    let rule = crate::basis::composite_gauss_rule(points, subdomains, lo, hi)?;
    Ok(CollocationGrid {
        points: rule.nodes().to_vec(),
        weights: rule.weights().to_vec(),
        structure: GridStructure::CompositeGauss { subdomains, points },
        interval: (lo, hi),
        periodic: false,
    })
}

/// Uniform cell-center grid with midpoint weights h.
pub fn midpoint_grid(lo: f64, hi: f64, cells: usize, periodic: bool) -> CollocationGrid {
    assert!(cells >= 1);
    let h = (hi - lo) / cells as f64;
    let points = (0..cells).map(|i| lo + (i as f64 + 0.5) * h).collect();
    CollocationGrid {
        points,
        weights: vec![h; cells],
        structure: GridStructure::UniformMidpoint { cells },
        interval: (lo, hi),
        periodic,
    }
}

/// Collocation operator D with D_ki = rho w_i J(x_k - x_i) off the diagonal
/// and the diagonal chosen so each row sums to zero, which is the discrete
/// statement that constants lie in the operator's kernel.
pub fn assemble_collocation(spec: &KernelSpec, grid: &CollocationGrid, rho: f64) -> Array2<f64> {
    let n = grid.len();
    let mut d = Array2::zeros((n, n));
    for k in 0..n {
        let mut offdiag = 0.0;
        for i in 0..n {
            if i == k {
                continue;
            }
            let v = rho * grid.weights[i] * spec.eval(grid.points[k] - grid.points[i]);
            d[[k, i]] = v;
            offdiag += v;
        }
        d[[k, k]] = -offdiag;
    }
    d
}

/// The collocation system as a second-order ODE with identity mass, sharing
/// the time-stepping machinery with the Galerkin path.
pub fn collocation_ode<G>(spec: &KernelSpec, grid: &CollocationGrid, rho: f64, g: G) -> SecondOrderOde
where
    G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    let n = grid.len();
    let op = assemble_collocation(spec, grid, rho);
    let points = grid.points.clone();
    SecondOrderOde {
        mass: Array1::ones(n),
        op,
        load: Arc::new(move |t| Array1::from_shape_fn(points.len(), |i| g(points[i], t))),
    }
}

/// Integrate u'' = D u + g at the collocation nodes. Nodal values are
/// reported directly; no basis synthesis is involved.
#[allow(clippy::too_many_arguments)]
pub fn run_collocation_1d<G, F1, F2>(
    spec: &KernelSpec,
    grid: &CollocationGrid,
    rho: f64,
    g: G,
    u0: F1,
    v0: F2,
    dt: f64,
    t_end: f64,
    scheme: Scheme,
    snapshot_times: &[f64],
) -> Result<Vec<Snapshot>>
where
    G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    let indices = evolve::snapshot_steps(snapshot_times, dt, t_end)?;
    let ode = collocation_ode(spec, grid, rho, g);
    let a0 = Array1::from_shape_fn(grid.len(), |i| u0(grid.points[i]));
    let adot0 = Array1::from_shape_fn(grid.len(), |i| v0(grid.points[i]));
    let coeffs = evolve::run_coefficients(&ode, a0, &adot0, dt, scheme, &indices)?;
    Ok(coeffs
        .into_iter()
        .map(|(idx, u)| Snapshot {
            t: idx as f64 * dt,
            xs: grid.points.clone(),
            us: u.to_vec(),
        })
        .collect())
}

/// Sampled 2D solution on the cell-center grid of the unit torus.
#[derive(Debug, Clone)]
pub struct Snapshot2d {
    pub t: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `us[[i, j]]` is the value at `(xs[i], ys[j])`.
    pub us: Array2<f64>,
}

/// Midpoint discretization of the nonlocal operator on the periodic unit
/// square, with the isotropic Gaussian kernel (s/pi) exp(-s (x^2 + y^2))
/// periodized over the torus. The kernel factorizes into periodized 1D
/// Gaussians, so a single table of J(d h) values drives the double sum.
pub struct Torus2d {
    n: usize,
    h: f64,
    rho: f64,
    jtab: Vec<f64>,
}

impl Torus2d {
    pub fn new(scale: f64, n: usize, rho: f64) -> Torus2d {
        assert!(n >= 4, "torus grid needs at least 4 cells per side");
        let kern = KernelSpec::gaussian(scale).periodized(1.0);
        let h = 1.0 / n as f64;
        let mut jtab = vec![0.0; n];
        for (d, slot) in jtab.iter_mut().enumerate().take(n / 2 + 1) {
            *slot = kern.eval(d as f64 * h);
        }
        // mirror so the table is exactly symmetric under d -> n - d
        for d in n / 2 + 1..n {
            jtab[d] = jtab[n - d];
        }
        Torus2d { n, h, rho, jtab }
    }

    pub fn cells(&self) -> usize {
        self.n
    }

    /// Cell-center coordinates along one axis.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|i| (i as f64 + 0.5) * self.h).collect()
    }

    /// Apply the operator: (D u)_ij = rho h^2 sum_i'j' J2(x-x', y-y')
    /// (u_i'j' - u_ij). The difference form keeps constants stationary to
    /// the last bit.
    pub fn apply(&self, u: &Array2<f64>) -> Array2<f64> {
        let n = self.n;
        let scale = self.rho * self.h * self.h;
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let uij = u[[i, j]];
                let mut acc = 0.0;
                for i2 in 0..n {
                    let jx = self.jtab[(i2 + n - i) % n];
                    for j2 in 0..n {
                        let jy = self.jtab[(j2 + n - j) % n];
                        acc += jx * jy * (u[[i2, j2]] - uij);
                    }
                }
                out[[i, j]] = scale * acc;
            }
        }
        out
    }

    /// One semi-implicit Euler step: v += dt D u, then u += dt v.
    /// Forward Euler on the second-order system is unstable for the
    /// oscillatory spectrum; this variant is the stable one-step scheme.
    pub fn step(&self, u: &mut Array2<f64>, v: &mut Array2<f64>, dt: f64) {
        let du = self.apply(u);
        v.zip_mut_with(&du, |vv, &d| *vv += dt * d);
        u.zip_mut_with(v, |uu, &vv| *uu += dt * vv);
    }

    /// Total discrete momentum sum v_ij h^2.
    pub fn momentum(&self, v: &Array2<f64>) -> f64 {
        v.sum() * self.h * self.h
    }
}

/// Run the 2D torus experiment from pointwise initial data.
#[allow(clippy::too_many_arguments)]
pub fn run_midpoint_2d<F1, F2>(
    scale: f64,
    n: usize,
    rho: f64,
    u0: F1,
    v0: F2,
    dt: f64,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<Vec<Snapshot2d>>
where
    F1: Fn(f64, f64) -> f64,
    F2: Fn(f64, f64) -> f64,
{
    let indices = evolve::snapshot_steps(snapshot_times, dt, t_end)?;
    let sim = Torus2d::new(scale, n, rho);
    let grid = sim.grid();
    let mut u = Array2::from_shape_fn((n, n), |(i, j)| u0(grid[i], grid[j]));
    let mut v = Array2::from_shape_fn((n, n), |(i, j)| v0(grid[i], grid[j]));

    let mut wanted = indices;
    wanted.sort_unstable();
    wanted.dedup();

    let mut out = Vec::with_capacity(wanted.len());
    let mut step_index = 0usize;
    for &target in &wanted {
        while step_index < target {
            sim.step(&mut u, &mut v, dt);
            step_index += 1;
        }
        out.push(Snapshot2d {
            t: step_index as f64 * dt,
            xs: grid.clone(),
            ys: grid.clone(),
            us: u.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn two_point_grid_operator_by_hand() {
        let spec = KernelSpec::gaussian(400.0);
        let grid = CollocationGrid {
            points: vec![-0.5, 0.5],
            weights: vec![1.0, 1.0],
            structure: GridStructure::UniformMidpoint { cells: 2 },
            interval: (-1.0, 1.0),
            periodic: false,
        };
        let rho = 0.3;
        let d = assemble_collocation(&spec, &grid, rho);
        let j1 = spec.eval(1.0);
        assert_eq!(d[[0, 1]], rho * j1);
        assert_eq!(d[[1, 0]], rho * j1);
        assert_eq!(d[[0, 0]], -rho * j1);
        assert_eq!(d[[1, 1]], -rho * j1);
    }

    #[test]
    fn row_sums_vanish_for_all_grid_types() {
        let spec = KernelSpec::gaussian(400.0);
        let grids = [
            single_gauss_grid(-1.0, 1.0, 24).unwrap(),
            composite_grid(-1.0, 1.0, 8, 4).unwrap(),
            midpoint_grid(0.0, 1.0, 32, true),
        ];
        for grid in &grids {
            let rho = 0.7;
            let d = assemble_collocation(&spec, grid, rho);
            let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for k in 0..grid.len() {
                let sum: f64 = (0..grid.len()).map(|i| d[[k, i]]).sum();
                assert!(sum.abs() <= 1e-13 * rho * dmax, "row {k}: {sum}");
            }
            let ones = Array1::ones(grid.len());
            let du = d.dot(&ones);
            assert!(du.iter().all(|v| v.abs() <= 1e-13 * rho * dmax));
        }
    }

    #[test]
    fn symmetrized_operator_is_dissipative() {
        let spec = KernelSpec::gaussian(400.0);
        for grid in [
            composite_grid(-1.0, 1.0, 4, 4).unwrap(),
            single_gauss_grid(-1.0, 1.0, 64).unwrap(),
        ] {
            let d = assemble_collocation(&spec, &grid, 1.0);
            let m = grid.len();
            // W^{1/2} D W^{-1/2} is symmetric with real nonpositive eigenvalues
            let mut sym = Array2::zeros((m, m));
            for k in 0..m {
                for i in 0..m {
                    sym[[k, i]] = (grid.weights[k] / grid.weights[i]).sqrt() * d[[k, i]];
                }
            }
            let asym = (0..m)
                .flat_map(|k| (0..m).map(move |i| (k, i)))
                .fold(0.0f64, |mx, (k, i)| mx.max((sym[[k, i]] - sym[[i, k]]).abs()));
            assert!(asym < 1e-12, "symmetrization residual {asym}");
            let eigs = linalg::symmetric_eigenvalues(&sym);
            assert!(eigs.iter().all(|&e| e <= 1e-10), "eigs {:?}", eigs.last());
        }
    }

    #[test]
    fn torus_operator_is_dissipative() {
        // uniform weights make the 2D operator symmetric outright; its
        // spectrum must be nonpositive
        let n = 16;
        let sim = Torus2d::new(400.0, n, 0.1);
        let dim = n * n;
        let mut mat = Array2::zeros((dim, dim));
        for col in 0..dim {
            let mut e = Array2::zeros((n, n));
            e[[col / n, col % n]] = 1.0;
            let de = sim.apply(&e);
            for row in 0..dim {
                mat[[row, col]] = de[[row / n, row % n]];
            }
        }
        let asym = (0..dim)
            .flat_map(|k| (0..dim).map(move |i| (k, i)))
            .fold(0.0f64, |mx, (k, i)| mx.max((mat[[k, i]] - mat[[i, k]]).abs()));
        assert!(asym < 1e-14, "asymmetry {asym}");
        let eigs = linalg::symmetric_eigenvalues(&mat);
        assert!(eigs.iter().all(|&e| e <= 1e-10), "max eig {:?}", eigs.last());
    }

    #[test]
    fn composite_grid_with_one_subdomain_is_the_plain_rule() {
        let g = composite_grid(-1.0, 1.0, 1, 12).unwrap();
        let rule = gauss_rule(12, -1.0, 1.0).unwrap();
        assert_eq!(g.points, rule.nodes());
        assert_eq!(g.weights, rule.weights());
    }

    #[test]
    fn composite_grid_tiles_measure() {
        let g = composite_grid(-1.0, 1.0, 4, 2).unwrap();
        assert_eq!(g.len(), 8);
        let sum: f64 = g.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-13);
    }

    #[test]
    fn composite_and_single_rules_agree_on_kernel_mass() {
        // the kernel peak sits on a panel boundary here, the worst case for
        // the composite rule; 12 points per subdomain reach 1e-14, while 8
        // leave ~1e-8
        let spec = KernelSpec::gaussian(400.0);
        let fine = composite_grid(-1.0, 1.0, 16, 12).unwrap();
        let single = composite_grid(-1.0, 1.0, 1, 128).unwrap();
        let mass = |g: &CollocationGrid| -> f64 {
            g.points
                .iter()
                .zip(&g.weights)
                .map(|(&x, &w)| w * spec.eval(x))
                .sum()
        };
        let a = mass(&fine);
        let b = mass(&single);
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        assert!((a - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constants_stay_constant_in_time() {
        let spec = KernelSpec::gaussian(400.0);
        let grid = composite_grid(-1.0, 1.0, 8, 4).unwrap();
        let snaps = run_collocation_1d(
            &spec,
            &grid,
            0.5,
            |_, _| 0.0,
            |_| 3.25,
            |_| 0.0,
            0.01,
            1.0,
            Scheme::PaperImplicit,
            &[0.0, 0.5, 1.0],
        )
        .unwrap();
        // rounding in the neutral constant mode grows linearly with the
        // step count; 1e-11 over 100 steps is the roundoff scale
        for s in &snaps {
            for &u in &s.us {
                assert!((u - 3.25).abs() < 1e-11, "t={}: {u}", s.t);
            }
        }
    }

    #[test]
    fn refining_the_grid_halves_the_disagreement_or_better() {
        // self-convergence oracle: each resolution is checked against a 9x
        // finer midpoint run whose cell centers contain the coarse centers
        // exactly (odd refinement ratio), so no interpolation enters
        let spec = KernelSpec::gaussian(400.0);
        let u0 = |x: f64| (-100.0 * x * x).exp();
        let run = |cells: usize| {
            let grid = midpoint_grid(-1.0, 1.0, cells, false);
            run_collocation_1d(
                &spec,
                &grid,
                0.1,
                |_, _| 0.0,
                u0,
                |_| 0.0,
                0.005,
                0.25,
                Scheme::PaperImplicit,
                &[0.25],
            )
            .unwrap()
        };
        let gap = |cells: usize| -> f64 {
            let coarse = run(cells);
            let fine = run(9 * cells);
            coarse[0]
                .us
                .iter()
                .enumerate()
                .map(|(i, &u)| (u - fine[0].us[9 * i + 4]).abs())
                .fold(0.0f64, f64::max)
        };
        let e32 = gap(32);
        let e64 = gap(64);
        assert!(e64 <= 0.5 * e32, "e32={e32:.3e} e64={e64:.3e}");
    }

    #[test]
    fn periodic_1d_collocation_is_shift_equivariant() {
        let spec = KernelSpec::gaussian(400.0).periodized(1.0);
        let cells = 16usize;
        let shift = 3usize;
        let grid = midpoint_grid(0.0, 1.0, cells, true);
        let h = 1.0 / cells as f64;
        let bump = |x: f64| (-50.0 * (x - 0.5) * (x - 0.5)).exp();
        let base = run_collocation_1d(
            &spec, &grid, 0.2, |_, _| 0.0, bump, |_| 0.0, 0.01, 0.5,
            Scheme::ExplicitCentral, &[0.5],
        )
        .unwrap();
        let shifted = run_collocation_1d(
            &spec,
            &grid,
            0.2,
            |_, _| 0.0,
            |x| bump((x - shift as f64 * h).rem_euclid(1.0)),
            |_| 0.0,
            0.01,
            0.5,
            Scheme::ExplicitCentral,
            &[0.5],
        )
        .unwrap();
        for i in 0..cells {
            let d = (shifted[0].us[(i + shift) % cells] - base[0].us[i]).abs();
            assert!(d <= 1e-11, "node {i}: {d}");
        }
    }

    #[test]
    fn torus_constants_are_stationary_bit_exactly() {
        let sim = Torus2d::new(400.0, 8, 0.1);
        let mut u = Array2::from_elem((8, 8), 2.5);
        let mut v = Array2::zeros((8, 8));
        for _ in 0..50 {
            sim.step(&mut u, &mut v, 0.1);
        }
        assert!(u.iter().all(|&x| x == 2.5));
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn torus_xy_symmetry_is_preserved() {
        let n = 16;
        let sim = Torus2d::new(400.0, n, 0.1);
        let grid = sim.grid();
        let mut u = Array2::from_shape_fn((n, n), |(i, j)| {
            (-10.0 * ((grid[i] - 0.5).powi(2) + (grid[j] - 0.5).powi(2))).exp()
        });
        let mut v = Array2::zeros((n, n));
        for _ in 0..50 {
            sim.step(&mut u, &mut v, 0.1);
            for i in 0..n {
                for j in 0..n {
                    assert!((u[[i, j]] - u[[j, i]]).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn torus_conserves_momentum() {
        let n = 16;
        let sim = Torus2d::new(400.0, n, 0.1);
        let grid = sim.grid();
        let mut u = Array2::from_shape_fn((n, n), |(i, j)| {
            (-10.0 * ((grid[i] - 0.5).powi(2) + (grid[j] - 0.3).powi(2))).exp()
        });
        let mut v = Array2::zeros((n, n));
        for _ in 0..100 {
            sim.step(&mut u, &mut v, 0.1);
            assert!(sim.momentum(&v).abs() <= 1e-12);
        }
    }

    #[test]
    fn torus_solution_shifts_with_shifted_data() {
        let n = 16;
        let shift = 3usize;
        let sim = Torus2d::new(400.0, n, 0.1);
        let grid = sim.grid();
        let bump = |x: f64, y: f64| (-10.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).exp();
        let mut u_a = Array2::from_shape_fn((n, n), |(i, j)| bump(grid[i], grid[j]));
        let mut v_a = Array2::zeros((n, n));
        let mut u_b =
            Array2::from_shape_fn((n, n), |(i, j)| bump(grid[(i + n - shift) % n], grid[j]));
        let mut v_b = Array2::zeros((n, n));
        for _ in 0..20 {
            sim.step(&mut u_a, &mut v_a, 0.1);
            sim.step(&mut u_b, &mut v_b, 0.1);
        }
        for i in 0..n {
            for j in 0..n {
                let d = (u_b[[(i + shift) % n, j]] - u_a[[i, j]]).abs();
                assert!(d <= 1e-12, "shift equivariance violated: {d}");
            }
        }
    }

    #[test]
    fn run_midpoint_2d_wraps_and_spreads() {
        let snaps = run_midpoint_2d(
            400.0,
            16,
            0.1,
            |x, y| (-10.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).exp(),
            |_, _| 0.0,
            0.1,
            2.0,
            &[0.0, 2.0],
        )
        .unwrap();
        assert_eq!(snaps.len(), 2);
        let initial_peak = snaps[0].us[[8, 8]];
        let later_peak = snaps[1].us[[8, 8]];
        // the pulse relaxes toward the surroundings
        assert!(later_peak < initial_peak);
        assert!(snaps[1].us.iter().all(|v| v.is_finite()));
    }
}
