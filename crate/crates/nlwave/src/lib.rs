//! Solvers for the nonlocal linear elastic wave equation
//! u_tt = rho * L u + g, where L is the convolution operator
//! integral of J(x - y) (u(y) - u(x)) dy with a nonnegative, symmetric,
//! normalized kernel J.
//!
//! Two independent spatial discretizations are provided:
//!
//! * a Legendre spectral Galerkin method ([`assembly`], [`evolve`]) that
//!   reduces the equation to M a'' = A a + b(t) in coefficient space, and
//! * quadrature collocation ([`collocation`]), including a composite-grid
//!   variant and a 2D periodic midpoint scheme, which doubles as an
//!   independent oracle for the Galerkin path.
//!
//! [`analysis`] turns the operator's structural properties (negative
//! semi-definiteness, norm bounds, spectral convergence, the local wave
//! limit) into computable reports, and [`cli`] drives experiments from JSON
//! configs with deterministic CSV/JSON output.

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod cli;
pub mod collocation;
pub mod config;
pub mod error;
pub mod evolve;
pub mod kernel;
pub mod linalg;
pub mod output;

pub use error::{Error, Result};
