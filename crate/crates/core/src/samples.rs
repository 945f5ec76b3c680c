//! Small closed-form problems used in docs, tests and the CLI examples.

use crate::function_space::{BivariateKernel, PiecewiseMatrixFunction};
use crate::functionals::{LinearVectorFunctional, PointTerm};
use crate::linalg::{RealMatrix, RealVector};
use crate::problem::{JumpModel, ProblemSpec};

/// Constant scalar function on `[0, 1]`.
pub fn scalar_const(c: f64) -> PiecewiseMatrixFunction {
    PiecewiseMatrixFunction::constant(0.0, 1.0, &RealMatrix::from_element(1, 1, c)).expect("valid domain")
}

/// Scalar problem on `[0, 1]` with `Phi = 1`, `A = 0`, `B = 1`, constant
/// forcing `f`, `l x = x(0) = 0`, and control kernel `K = 1`.
///
/// Every `x` gives `\int_0^1 (x' - \int_0^1 x' - f) = -f`, so the problem is
/// solvable only for `f = 0`; the control `u = -f` repairs it.
pub fn s1_problem(forcing: f64) -> ProblemSpec {
    let boundary = LinearVectorFunctional::new(
        1,
        1,
        vec![PointTerm::new(0.0, None, RealMatrix::from_element(1, 1, 1.0))],
        None,
    )
    .expect("shapes agree");
    ProblemSpec {
        a: 0.0,
        b: 1.0,
        m: 1,
        n: 1,
        state_moment: scalar_const(0.0),
        rate_moment: scalar_const(1.0),
        profile: scalar_const(1.0),
        forcing: scalar_const(forcing),
        impulses: Vec::new(),
        boundary,
        alpha: RealVector::zeros(1),
        control_kernel: Some(
            BivariateKernel::constant(0.0, 1.0, &RealMatrix::from_element(1, 1, 1.0)).expect("valid domain"),
        ),
        jump_model: JumpModel::Free,
    }
}
