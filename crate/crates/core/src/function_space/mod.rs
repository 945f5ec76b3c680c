//! Piecewise polynomial matrix-valued functions of `t` on `[a, b]`.
//!
//! Every object the solver builds from the inputs is an integral or product
//! of the inputs, so a piecewise polynomial representation stays closed under
//! all required operations and never introduces interpolation error.

mod kernel;
mod piecewise;
mod poly;
mod quadrature;

pub use kernel::BivariateKernel;
pub use piecewise::{PiecewiseMatrixFunction, Side};
pub use poly::{Poly, PolyMatrix};
pub use quadrature::QuadratureConfig;

