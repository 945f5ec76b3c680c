//! Problem data for the controlled impulsive integro-differential system
//!
//! ```text
//! x'(t) - Phi(t) \int_a^b [A(s) x(s) + B(s) x'(s)] ds = f(t) + \int_a^b K(t,s) ds u,   t != tau_i
//! E_i (x(tau_i+) - x(tau_i-)) = S_i x(tau_i-) + gamma_i,                             i = 1..p
//! l x = alpha
//! ```

use crate::error::{Error, Result};
use crate::function_space::{BivariateKernel, PiecewiseMatrixFunction, QuadratureConfig};
use crate::functionals::{build_delta, impulse_functional, stack, ImpulseRecord, LinearVectorFunctional};
use crate::linalg::{RealVector, ToleranceConfig};

/// Whether solutions may jump freely at impulse instants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpModel {
    /// Continuous solutions; impulse conditions reduce to `-S_i x(tau_i) = gamma_i`.
    None,
    /// A jump vector `h_i` per instant joins the parameter vector.
    #[default]
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub n: usize,
    /// `A(s)`, `m x n`.
    pub state_moment: PiecewiseMatrixFunction,
    /// `B(s)`, `m x n`.
    pub rate_moment: PiecewiseMatrixFunction,
    /// `Phi(t)`, `n x m`.
    pub profile: PiecewiseMatrixFunction,
    /// `f(t)`, `n x 1`.
    pub forcing: PiecewiseMatrixFunction,
    pub impulses: Vec<ImpulseRecord>,
    /// Boundary functional `l` with `q` rows.
    pub boundary: LinearVectorFunctional,
    pub alpha: RealVector,
    /// `K(t, s)`, `n x n`.
    pub control_kernel: Option<BivariateKernel>,
    pub jump_model: JumpModel,
}

/// Tolerances and quadrature shared by every stage of a solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverConfig {
    pub tol: ToleranceConfig,
    pub quad: QuadratureConfig,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        let (a, b, m, n) = (self.a, self.b, self.m, self.n);
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput(format!("invalid interval [{a}, {b}]")));
        }
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput("m and n must be positive".into()));
        }
        let checks: [(&str, &PiecewiseMatrixFunction, (usize, usize)); 4] = [
            ("A", &self.state_moment, (m, n)),
            ("B", &self.rate_moment, (m, n)),
            ("Phi", &self.profile, (n, m)),
            ("f", &self.forcing, (n, 1)),
        ];
        for (name, f, shape) in checks {
            if f.shape() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has shape {:?}, expected {shape:?}",
                    f.shape()
                )));
            }
            if f.domain() != (a, b) {
                return Err(Error::InvalidInput(format!(
                    "{name} is defined on {:?}, expected [{a}, {b}]",
                    f.domain()
                )));
            }
        }
        let mut prev = a;
        for imp in &self.impulses {
            if !(imp.tau() > prev && imp.tau() < b) {
                return Err(Error::InvalidImpulse {
                    tau: imp.tau(),
                    reason: format!("instants must be strictly increasing inside ({a}, {b})"),
                });
            }
            if imp.n() != n {
                return Err(Error::InvalidImpulse {
                    tau: imp.tau(),
                    reason: format!("matrices have {} columns, expected n = {n}", imp.n()),
                });
            }
            prev = imp.tau();
        }
        if self.boundary.width() != n {
            return Err(Error::DimensionMismatch(format!(
                "boundary functional acts on {}-vectors, expected {n}",
                self.boundary.width()
            )));
        }
        if self.boundary.out_dim() != self.alpha.len() {
            return Err(Error::DimensionMismatch(format!(
                "boundary functional has {} rows but alpha has length {}",
                self.boundary.out_dim(),
                self.alpha.len()
            )));
        }
        if self.alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite alpha".into()));
        }
        for term in self.boundary.points() {
            if !(term.t >= a && term.t <= b) {
                return Err(Error::OutsideDomain { t: term.t, a, b });
            }
            if term.side.is_none() && self.impulses.iter().any(|i| i.tau() == term.t) {
                return Err(Error::InvalidInput(format!(
                    "point term at impulse instant {} must declare a side",
                    term.t
                )));
            }
        }
        if let Some(w) = self.boundary.integral() {
            if w.domain() != (a, b) {
                return Err(Error::InvalidInput("boundary weight has the wrong domain".into()));
            }
        }
        if let Some(k) = &self.control_kernel {
            if (k.rows(), k.cols()) != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "control kernel has shape {:?}, expected {:?}",
                    (k.rows(), k.cols()),
                    (n, n)
                )));
            }
            if k.domain() != (a, b) {
                return Err(Error::InvalidInput("control kernel has the wrong domain".into()));
            }
        }
        Ok(())
    }

    pub fn impulse_instants(&self) -> Vec<f64> {
        self.impulses.iter().map(ImpulseRecord::tau).collect()
    }

    /// `k = k_1 + ... + k_p`.
    pub fn impulse_rows(&self) -> usize {
        self.impulses.iter().map(ImpulseRecord::k).sum()
    }

    pub fn q(&self) -> usize {
        self.boundary.out_dim()
    }

    /// Length of the parameter vector `(c_1, c_2, h_1, ..., h_p)`.
    pub fn param_count(&self) -> usize {
        match self.jump_model {
            JumpModel::None => self.m + self.n,
            JumpModel::Free => self.m + self.n + self.n * self.impulses.len(),
        }
    }

    /// `L = [phi_1; ...; phi_p; l]`.
    pub fn combined_functional(&self) -> Result<LinearVectorFunctional> {
        let mut parts: Vec<LinearVectorFunctional> = self.impulses.iter().map(impulse_functional).collect();
        parts.push(self.boundary.clone());
        stack(&parts, self.n)
    }

    /// `delta = (gamma_1, ..., gamma_p, alpha)`.
    pub fn delta(&self) -> RealVector {
        build_delta(&self.impulses, &self.alpha)
    }

    /// Same problem with a different forcing term.
    pub fn with_forcing(&self, forcing: PiecewiseMatrixFunction) -> Self {
        Self {
            forcing,
            ..self.clone()
        }
    }
}
