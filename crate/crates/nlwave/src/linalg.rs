//! Dense linear algebra kernels used by the solvers: LU factorization with
//! partial pivoting, a cyclic Jacobi eigensolver for symmetric matrices, and
//! power iteration with dominant-pair extraction.
//!
//! Matrices here are small and dense ((N+1) x (N+1) for basis degree N, or a
//! few hundred rows for collocation grids), so O(n^3) direct methods are the
//! right tool.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Pivot magnitudes below this signal a singular system.
pub const SINGULAR_PIVOT: f64 = 1e-14;

/// LU factorization of a square matrix with partial pivoting, stored packed.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Array2<f64>,
    perm: Vec<usize>,
}

/// Factor `a` as P*A = L*U with row pivoting.
pub fn lu_factor(a: &Array2<f64>) -> Result<LuFactors> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "lu_factor requires a square matrix");
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = lu[[col, col]].abs();
        for row in col + 1..n {
            let v = lu[[row, col]].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val < SINGULAR_PIVOT {
            return Err(Error::SingularSystem { pivot: pivot_val });
        }
        if pivot_row != col {
            perm.swap(col, pivot_row);
            for j in 0..n {
                let tmp = lu[[col, j]];
                lu[[col, j]] = lu[[pivot_row, j]];
                lu[[pivot_row, j]] = tmp;
            }
        }
        let inv_pivot = 1.0 / lu[[col, col]];
        for row in col + 1..n {
            let factor = lu[[row, col]] * inv_pivot;
            lu[[row, col]] = factor;
            for j in col + 1..n {
                lu[[row, j]] -= factor * lu[[col, j]];
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    /// Solve A x = b using the stored factors.
    pub fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        // forward substitution (L has unit diagonal)
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s / self.lu[[i, i]];
        }
        x
    }
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order. Accurate to machine precision for the
/// matrix sizes used here.
pub fn symmetric_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let tol = 1e-15 * frobenius_norm(a).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Largest eigenvalue magnitude of a symmetric matrix (its 2-norm).
pub fn symmetric_two_norm(a: &Array2<f64>) -> f64 {
    symmetric_eigenvalues(a)
        .into_iter()
        .fold(0.0f64, |acc, e| acc.max(e.abs()))
}

pub fn frobenius_norm(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Outcome of power iteration on a general (possibly non-symmetric) operator.
#[derive(Debug, Clone, Copy)]
pub struct PowerRadius {
    /// Estimated spectral radius.
    pub radius: f64,
    /// Whether the residual tolerance was met within the iteration cap.
    pub converged: bool,
    pub iterations: usize,
}

/// Spectral radius estimate for a real operator given as a matvec closure.
///
/// Plain power iteration stalls on complex-conjugate dominant pairs, which
/// the time-stepping companion matrices have, so each step also fits the
/// best two-term recurrence x_{k+2} = p x_{k+1} + q x_k and takes the root
/// moduli of z^2 - p z - q when the fit residual passes the tolerance.
/// Returns the best estimate with `converged = false` when the cap is hit.
pub fn power_iteration_radius<F>(
    apply: F,
    dim: usize,
    tol: f64,
    max_iter: usize,
) -> PowerRadius
where
    F: Fn(&Array1<f64>) -> Array1<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9);
    let mut x0 = Array1::from_shape_fn(dim, |_| rng.random::<f64>() - 0.5);
    let n0 = norm2(&x0);
    x0.mapv_inplace(|v| v / n0);
    let mut x1 = apply(&x0);
    let mut x2 = apply(&x1);

    let mut best = f64::NAN;
    for it in 0..max_iter {
        let n2 = norm2(&x2);
        if n2 == 0.0 {
            // operator annihilated the iterate; radius 0 within this subspace
            return PowerRadius { radius: 0.0, converged: true, iterations: it };
        }

        // linear fit x2 ~ lambda * x1
        let x1x1 = dot(&x1, &x1);
        let lambda = if x1x1 > 0.0 { dot(&x2, &x1) / x1x1 } else { 0.0 };
        let res_lin = {
            let mut s = 0.0;
            for i in 0..dim {
                let r = x2[i] - lambda * x1[i];
                s += r * r;
            }
            s.sqrt() / n2
        };
        if res_lin <= tol {
            return PowerRadius { radius: lambda.abs(), converged: true, iterations: it };
        }

        // quadratic fit x2 ~ p x1 + q x0 via 2x2 normal equations
        let g11 = x1x1;
        let g10 = dot(&x1, &x0);
        let g00 = dot(&x0, &x0);
        let b1 = dot(&x2, &x1);
        let b0 = dot(&x2, &x0);
        let det = g11 * g00 - g10 * g10;
        if det.abs() > 1e-300 {
            let p = (b1 * g00 - b0 * g10) / det;
            let q = (g11 * b0 - g10 * b1) / det;
            let mut s = 0.0;
            for i in 0..dim {
                let r = x2[i] - p * x1[i] - q * x0[i];
                s += r * r;
            }
            let res_quad = s.sqrt() / n2;
            let disc = 0.25 * p * p + q;
            let radius = if disc >= 0.0 {
                let r1 = 0.5 * p + disc.sqrt();
                let r2 = 0.5 * p - disc.sqrt();
                r1.abs().max(r2.abs())
            } else {
                // complex pair: |z|^2 equals the product of roots, -q
                (-q).sqrt()
            };
            best = radius;
            if res_quad <= tol {
                return PowerRadius { radius, converged: true, iterations: it };
            }
        } else {
            best = lambda.abs();
        }

        // advance the window, rescaling all three consistently
        let scale = 1.0 / n2;
        let next = apply(&x2);
        x0 = x1.mapv(|v| v * scale);
        x1 = x2.mapv(|v| v * scale);
        x2 = next.mapv(|v| v * scale);
    }
    PowerRadius { radius: best, converged: false, iterations: max_iter }
}

fn norm2(v: &Array1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
