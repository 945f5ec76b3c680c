//! Solvability analysis and control regularization for linear impulsive
//! boundary-value problems of integro-differential equations with a
//! degenerate kernel.
//!
//! The pipeline reduces the problem to finite linear algebra:
//!
//! 1. [`generating`] builds `D`, `b~`, `F`, `X_{r1}` and `Q`, decides
//!    solvability through two projector conditions and returns the
//!    `r2`-parameter solution family.
//! 2. [`control`] assembles `U u = g` from the control kernel moments, checks
//!    `P_{U*} g = 0` and returns the affine control family `U^+ g + P_U c`.
//! 3. [`oracle`] independently discretizes the full problem and checks the
//!    verdicts by dense least squares.
//!
//! ```
//! use idereg_core::{control, samples, SolverConfig};
//!
//! let p = samples::s1_problem(1.0);
//! let out = control::regularize(&p, &p.delta(), &SolverConfig::default()).unwrap();
//! assert!((out.u[0] + 1.0).abs() < 1e-12);
//! assert_eq!(out.family.r2, 1);
//! ```

pub mod control;
pub mod error;
pub mod function_space;
pub mod functionals;
pub mod generating;
pub mod instances;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod samples;

pub use error::{Error, Result};
pub use problem::{JumpModel, ProblemSpec, SolverConfig};
