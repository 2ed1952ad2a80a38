//! Stationary `C^{2,alpha}` perturbations of the triple-junction surface
//! `(Y x S^1) ∩ B` by spectral discretization and fixed-point iteration.
//!
//! Each sheet `M_i` is a graph over `[0,1] x S^1` with height `u_i`. The
//! nonlinear problem `Lap u = F(u)`, `B u = (0, G(u))`, `u(1, .) = phi` is solved by
//! Picard iteration on a Chebyshev (x) by Fourier (y) grid.

// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chebyshev;
pub mod cli;
pub mod error;
pub mod field;
pub mod fourier;
pub mod geometry;
pub mod linear;
pub mod mesh;
pub mod nonlinearity;
pub mod oracles;
pub mod picard;
pub mod sampling;

pub use error::{Error, Result};
pub use field::{BoundaryTriple, Grid, Periodic, ScalarField, TripleField};
pub use geometry::{CutoffProfile, JunctionFrame, TripleIndex};
pub use linear::{solve_linear_system, LinearSolver};
pub use oracles::{exact_family, ExactFamily};
pub use picard::{solve_nonlinear, PicardSolver, SolveFailure, SolveOptions, SolveReport};
