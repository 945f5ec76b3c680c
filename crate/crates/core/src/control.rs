//! Regularizing controls.
//!
//! A constant control `u` enters through `f -> f + k(t) u` with
//! `k(t) = \int_a^b K(t, s) ds`. Since everything downstream of `f` is linear,
//!
//! ```text
//! b~_1 = b~ + W_1 u,        W_1 = \int_a^b [A k~ + B k] ds,   k~ = \int_a^t k
//! F_1  = F  + G u,          G   = k~ + Psi_0 D^+ W_1
//! ```
//!
//! and the two solvability conditions of the controlled problem stack into
//! `U u = g`:
//!
//! ```text
//! U = [ P_{D*_{d1}} W_1 ; P_{Q*_{d2}} L G ],   g = [ -P_{D*_{d1}} b~ ; P_{Q*_{d2}} (delta - L F) ]
//! ```
//!
//! The controlled problem is solvable for some `u` iff `P_{U*} g = 0`, and
//! the admissible controls are exactly `u = U^+ g + P_U c`.
//!
//! Scalar trace (`[0, 1]`, `Phi = 1`, `A = 0`, `B = 1`, `f = 1`,
//! `l x = x(0)`, `K = 1`): `k = 1`, `k~ = t`, `W_1 = 1`, `d1 = 1`, `d2 = 0`,
//! `U = [1]`, `g = [-1]`, so `u = -1` and the repaired forcing vanishes.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::function_space::{PiecewiseMatrixFunction, QuadratureConfig};
use crate::generating::{check_solvability, solve_family, AlgebraicCore, SolutionFamily, SolvabilityReport};
use crate::linalg::{
    max_abs, numerical_rank_with_scale, pseudoinverse, pseudoinverse_parts, spectral_norm, PseudoInverse, RealMatrix,
    RealVector,
    ToleranceConfig,
};
use crate::problem::{ProblemSpec, SolverConfig};

#[derive(Debug, Clone)]
pub struct ControlMoments {
    /// `k(t) = \int_a^b K(t, s) ds`, `n x n`.
    pub k: PiecewiseMatrixFunction,
    /// `k~(t) = \int_a^t k`.
    pub k_tilde: PiecewiseMatrixFunction,
    /// `W_1`, `m x n`.
    pub w1: RealMatrix,
    /// `G(t) = k~(t) + Psi_0(t) D^+ W_1`, `n x n`.
    pub g: PiecewiseMatrixFunction,
}

#[derive(Debug, Clone)]
pub struct RegularizationSystem {
    /// `(d1 + d2) x n`.
    pub u: RealMatrix,
    pub g: RealVector,
    pub u_pinv: RealMatrix,
    pub p_u: RealMatrix,
    pub p_u_star: RealMatrix,
    /// `|P_{U*} g|_inf`
    pub criterion_residual: f64,
    pub d1: usize,
    pub d2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizabilityCheck {
    pub residual: f64,
    pub regularizable: bool,
}

/// `u = u0 + P_U c`.
#[derive(Debug, Clone)]
pub struct ControlFamily {
    pub u0: RealVector,
    pub p_u: RealMatrix,
    pub dim: usize,
}

impl ControlFamily {
    pub fn member(&self, c: &RealVector) -> Result<RealVector> {
        if c.len() != self.u0.len() {
            return Err(Error::DimensionMismatch(format!(
                "control parameter has length {}, expected {}",
                c.len(),
                self.u0.len()
            )));
        }
        Ok(&self.u0 + &self.p_u * c)
    }
}

/// How to pick one control out of the admissible family.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlPolicy {
    MinNorm,
    /// Minimize `(u - reference)^T weight (u - reference)`.
    Weighted {
        weight: RealMatrix,
        reference: RealVector,
    },
}

#[derive(Debug, Clone)]
pub struct Regularized {
    pub u: RealVector,
    pub control: ControlFamily,
    pub system: RegularizationSystem,
    /// Solvability of the problem after the control is applied.
    pub report: SolvabilityReport,
    pub family: SolutionFamily,
}

pub fn build_moments(p: &ProblemSpec, core: &AlgebraicCore) -> Result<ControlMoments> {
    let kernel = p.control_kernel.as_ref().ok_or(Error::NoControlKernel)?;
    let quad = &core.config.quad;
    let k = kernel.collapse(quad);
    let k_tilde = k.antiderivative();
    let w1 = PiecewiseMatrixFunction::matmul(&p.state_moment, &k_tilde)?
        .add(&PiecewiseMatrixFunction::matmul(&p.rate_moment, &k)?)?
        .integrate_all(quad);
    let g = k_tilde.add(&core.psi0.mul_right(&(&core.d_pinv * &w1))?)?;
    Ok(ControlMoments { k, k_tilde, w1, g })
}

pub fn build_system(
    core: &AlgebraicCore,
    moments: &ControlMoments,
    delta: &RealVector,
) -> Result<RegularizationSystem> {
    let tol = &core.config.tol;
    let defect = core.boundary_defect(delta)?;
    let lg = core.functional.apply(&moments.g, &core.config.quad)?;
    let top = &core.p_d_star_d1 * &moments.w1;
    let bottom = &core.p_q_star_d2 * &lg;
    let (d1, d2) = (top.nrows(), bottom.nrows());
    let n = moments.w1.ncols();
    let mut u = RealMatrix::zeros(d1 + d2, n);
    u.view_mut((0, 0), (d1, n)).copy_from(&top);
    u.view_mut((d1, 0), (d2, n)).copy_from(&bottom);
    let g_top = -(&core.p_d_star_d1 * &core.b_tilde);
    let g_bottom = &core.p_q_star_d2 * defect;
    let g = RealVector::from_iterator(d1 + d2, g_top.iter().chain(g_bottom.iter()).copied());
    // U is a projection of W_1 and L G; rank is judged against their size
    let scale = spectral_norm(&moments.w1)?.max(spectral_norm(&lg)?);
    assemble(u, g, d1, d2, scale, tol)
}

/// Projectors and criterion residual for an explicit `U`, `g`.
pub fn system_from_parts(
    u: RealMatrix,
    g: RealVector,
    d1: usize,
    d2: usize,
    tol: &ToleranceConfig,
) -> Result<RegularizationSystem> {
    assemble(u, g, d1, d2, 0.0, tol)
}

fn assemble(
    u: RealMatrix,
    g: RealVector,
    d1: usize,
    d2: usize,
    scale: f64,
    tol: &ToleranceConfig,
) -> Result<RegularizationSystem> {
    if u.nrows() != g.len() || u.nrows() != d1 + d2 {
        return Err(Error::DimensionMismatch(format!(
            "U is {:?}, g has length {}, blocks {d1} + {d2}",
            u.shape(),
            g.len()
        )));
    }
    let PseudoInverse {
        pinv: u_pinv,
        null_projector: p_u,
        conull_projector: p_u_star,
        ..
    } = pseudoinverse_parts(&u, scale, tol)?;
    let criterion_residual = max_abs((&p_u_star * &g).iter());
    Ok(RegularizationSystem {
        u,
        g,
        u_pinv,
        p_u,
        p_u_star,
        criterion_residual,
        d1,
        d2,
    })
}

pub fn check_regularizability(sys: &RegularizationSystem, tol: &ToleranceConfig) -> RegularizabilityCheck {
    RegularizabilityCheck {
        residual: sys.criterion_residual,
        regularizable: sys.criterion_residual < tol.solve_tol,
    }
}

pub fn control_family(sys: &RegularizationSystem, tol: &ToleranceConfig) -> Result<ControlFamily> {
    if !check_regularizability(sys, tol).regularizable {
        return Err(Error::NotRegularizable {
            criterion_residual: sys.criterion_residual,
        });
    }
    let dim = numerical_rank_with_scale(&sys.p_u, 1.0, tol)?;
    Ok(ControlFamily {
        u0: &sys.u_pinv * &sys.g,
        p_u: sys.p_u.clone(),
        dim,
    })
}

/// `u0 = U^+ g`, the Euclidean-smallest admissible control.
pub fn select_min_norm(fam: &ControlFamily) -> RealVector {
    fam.u0.clone()
}

/// The admissible control closest to `reference` in the `weight` norm.
pub fn select_weighted(
    fam: &ControlFamily,
    weight: &RealMatrix,
    reference: &RealVector,
    tol: &ToleranceConfig,
) -> Result<RealVector> {
    let n = fam.u0.len();
    if weight.shape() != (n, n) || reference.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "weight {:?} and reference of length {} do not match n = {n}",
            weight.shape(),
            reference.len()
        )));
    }
    let scale = weight.amax().max(f64::MIN_POSITIVE);
    if (weight - weight.transpose()).amax() > 1e-12 * scale {
        return Err(Error::InvalidWeight("matrix is not symmetric".into()));
    }
    let chol = Cholesky::new(weight.clone())
        .ok_or_else(|| Error::InvalidWeight("matrix is not positive definite".into()))?;
    let lt = chol.l().transpose();
    let lhs = &lt * &fam.p_u;
    let rhs = &lt * (reference - &fam.u0);
    let c = pseudoinverse(&lhs, tol)? * rhs;
    Ok(&fam.u0 + &fam.p_u * c)
}

/// Replaces `f` by `f + k(.) u` and drops the control kernel.
pub fn apply_control(p: &ProblemSpec, u: &RealVector, quad: &QuadratureConfig) -> Result<ProblemSpec> {
    let kernel = p.control_kernel.as_ref().ok_or(Error::NoControlKernel)?;
    if u.len() != p.n {
        return Err(Error::DimensionMismatch(format!(
            "control has length {}, expected n = {}",
            u.len(),
            p.n
        )));
    }
    let push = kernel
        .collapse(quad)
        .mul_right(&RealMatrix::from_column_slice(u.len(), 1, u.as_slice()))?;
    let mut out = p.with_forcing(p.forcing.add(&push)?);
    out.control_kernel = None;
    Ok(out)
}

/// Build, check, select a min-norm control, apply it and re-solve.
pub fn regularize(p: &ProblemSpec, delta: &RealVector, cfg: &SolverConfig) -> Result<Regularized> {
    regularize_with(p, delta, cfg, &ControlPolicy::MinNorm)
}

pub fn regularize_with(
    p: &ProblemSpec,
    delta: &RealVector,
    cfg: &SolverConfig,
    policy: &ControlPolicy,
) -> Result<Regularized> {
    if p.control_kernel.is_none() {
        return Err(Error::NoControlKernel);
    }
    let core = AlgebraicCore::build(p, cfg)?;
    let moments = build_moments(p, &core)?;
    let system = build_system(&core, &moments, delta)?;
    let control = control_family(&system, &cfg.tol)?;
    let u = match policy {
        ControlPolicy::MinNorm => select_min_norm(&control),
        ControlPolicy::Weighted { weight, reference } => select_weighted(&control, weight, reference, &cfg.tol)?,
    };
    let repaired = apply_control(p, &u, &cfg.quad)?;
    let repaired_core = AlgebraicCore::build(&repaired, cfg)?;
    let report = check_solvability(&repaired_core, delta)?;
    let family = solve_family(&repaired_core, delta)?;
    Ok(Regularized {
        u,
        control,
        system,
        report,
        family,
    })
}
