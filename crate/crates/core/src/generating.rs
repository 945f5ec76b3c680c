//! Solvability and solution families for the control-free (generating) problem.
//!
//! Writing `c_1 = \int_a^b [A x + B x'] ds` turns the equation into
//! `x' = Phi c_1 + f`, hence
//!
//! ```text
//! x(t) = Psi(t) c_1 + c_2 + sum_i H_i(t) h_i + f~(t),   Psi = \int_a^t Phi,  f~ = \int_a^t f
//! ```
//!
//! with `H_i` the unit step at `tau_i` (free jump model only). Substituting
//! back gives the algebraic system `D xi = b~` for `xi = (c_1, c_2, h)`, with
//!
//! ```text
//! D  = [I_m, 0, ...] - \int_a^b [A Psi_0 + B Psi_0'] ds,    Psi_0 = [Psi, I_n, H_1, ..., H_p]
//! b~ = \int_a^b [A f~ + B f] ds
//! ```
//!
//! Every solution of `D xi = b~` has the form `xi = D^+ b~ + P_{D_{r1}} c_{r1}`
//! provided `P_{D*} b~ = 0`, so `x = F + X_{r1} c_{r1}` with
//! `F = f~ + Psi_0 D^+ b~` and `X_{r1} = Psi_0 P_{D_{r1}}`. Imposing
//! `L x = delta` yields `Q c_{r1} = delta - L F` with `Q = L X_{r1}`, which is
//! solvable iff `P_{Q*} (delta - L F) = 0`, and then
//! `c_{r1} = Q^+ (delta - L F) + P_{Q_{r2}} c_{r2}`.
//!
//! Worked trace on `[0, 1]`, `m = n = 1`, `Phi = 1`, `A = 0`, `B = 1`,
//! `f = 1`, `l x = x(0)`: `Psi_0 = [t, 1]`, `D = [0, 0]`, `b~ = 1`,
//! `P_{D*} = 1`, so the first condition fails with residual 1.

use log::debug;

use crate::error::{Error, Result};
use crate::function_space::{PiecewiseMatrixFunction, QuadratureConfig};
use crate::functionals::LinearVectorFunctional;
use crate::linalg::{
    independent_columns, independent_rows, max_abs, pseudoinverse_parts, spectral_norm, PseudoInverse,
    RealMatrix, RealVector,
};
use crate::problem::{JumpModel, ProblemSpec, SolverConfig};

/// Rank bookkeeping of the algebraic reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ranks {
    /// Length of the parameter vector.
    pub n_param: usize,
    pub rank_d: usize,
    pub r1: usize,
    pub d1: usize,
    /// `n_2 = rank Q`.
    pub rank_q: usize,
    pub r2: usize,
    pub d2: usize,
}

/// Everything the solvability criterion and the solution formula need.
#[derive(Debug, Clone)]
pub struct AlgebraicCore {
    pub psi: PiecewiseMatrixFunction,
    pub psi0: PiecewiseMatrixFunction,
    pub f_tilde: PiecewiseMatrixFunction,
    pub b_tilde: RealVector,
    pub d: RealMatrix,
    pub d_pinv: RealMatrix,
    pub p_d: RealMatrix,
    pub p_d_star: RealMatrix,
    pub p_d_r1: RealMatrix,
    pub p_d_star_d1: RealMatrix,
    /// `F = f~ + Psi_0 D^+ b~`.
    pub forcing_response: PiecewiseMatrixFunction,
    pub x_r1: PiecewiseMatrixFunction,
    pub functional: LinearVectorFunctional,
    /// `L F`.
    pub functional_of_response: RealVector,
    pub q: RealMatrix,
    pub q_pinv: RealMatrix,
    pub p_q: RealMatrix,
    pub p_q_star: RealMatrix,
    pub p_q_r2: RealMatrix,
    pub p_q_star_d2: RealMatrix,
    pub ranks: Ranks,
    pub config: SolverConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvabilityReport {
    /// `|P_{D*_{d1}} b~|_inf`
    pub cond1_residual: f64,
    /// `|P_{Q*_{d2}} (delta - L F)|_inf`
    pub cond2_residual: f64,
    pub solvable: bool,
}

/// `x(t, c) = particular(t) + basis(t) c`, `c` in `R^{r2}`.
#[derive(Debug, Clone)]
pub struct SolutionFamily {
    pub particular: PiecewiseMatrixFunction,
    pub basis: PiecewiseMatrixFunction,
    pub r2: usize,
}

impl SolutionFamily {
    pub fn member(&self, c: &[f64]) -> Result<PiecewiseMatrixFunction> {
        if c.len() != self.r2 {
            return Err(Error::DimensionMismatch(format!(
                "family has {} parameters, got {}",
                self.r2,
                c.len()
            )));
        }
        let shift = self.basis.mul_right(&RealMatrix::from_column_slice(c.len(), 1, c))?;
        self.particular.add(&shift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `L2` norm of `x' - Phi \int (A x + B x') - f`.
    pub ide_residual: f64,
    /// `|L x - delta|_inf`
    pub cond_residual: f64,
}

/// `Psi_0 = [Psi, I_n]`, extended by the jump carriers `H_i` under the free
/// jump model.
pub fn build_psi0(p: &ProblemSpec) -> Result<PiecewiseMatrixFunction> {
    let psi = p.profile.antiderivative();
    let ident = PiecewiseMatrixFunction::identity(p.a, p.b, p.n)?;
    let mut parts = vec![psi, ident];
    if p.jump_model == JumpModel::Free {
        for tau in p.impulse_instants() {
            parts.push(PiecewiseMatrixFunction::step(p.a, p.b, tau, p.n)?);
        }
    }
    let refs: Vec<&PiecewiseMatrixFunction> = parts.iter().collect();
    PiecewiseMatrixFunction::hcat(&refs)
}

/// `D = [I_m, 0] - \int_a^b [A Psi_0 + B Psi_0'] ds`.
///
/// Under the free jump model the trailing blocks are `-\int_{tau_i}^b A ds`;
/// jumps leave `x'` unchanged almost everywhere, so `B` contributes nothing
/// there.
pub fn build_d(p: &ProblemSpec, q: &QuadratureConfig) -> Result<RealMatrix> {
    build_d_from(p, &build_psi0(p)?, q)
}

fn build_d_from(p: &ProblemSpec, psi0: &PiecewiseMatrixFunction, q: &QuadratureConfig) -> Result<RealMatrix> {
    Ok(d_with_scale(p, psi0, q)?.0)
}

/// `D` together with the size of the terms it is the difference of.
fn d_with_scale(p: &ProblemSpec, psi0: &PiecewiseMatrixFunction, q: &QuadratureConfig) -> Result<(RealMatrix, f64)> {
    let integrand = PiecewiseMatrixFunction::matmul(&p.state_moment, psi0)?
        .add(&PiecewiseMatrixFunction::matmul(&p.rate_moment, &psi0.derivative())?)?;
    let moment = integrand.integrate_all(q);
    let scale = spectral_norm(&moment)?.max(1.0);
    let mut d = -moment;
    for i in 0..p.m {
        d[(i, i)] += 1.0;
    }
    Ok((d, scale))
}

/// `b~ = \int_a^b [A f~ + B f] ds` with `f~ = \int_a^t f`.
pub fn build_btilde(p: &ProblemSpec, f: &PiecewiseMatrixFunction, q: &QuadratureConfig) -> Result<RealVector> {
    let integrand = PiecewiseMatrixFunction::matmul(&p.state_moment, &f.antiderivative())?
        .add(&PiecewiseMatrixFunction::matmul(&p.rate_moment, f)?)?;
    let v = integrand.integrate_all(q);
    Ok(v.column(0).into_owned())
}

/// `F = f~ + Psi_0 D^+ b~` for an arbitrary forcing `f`.
pub fn build_forcing_response(
    p: &ProblemSpec,
    core: &AlgebraicCore,
    f: &PiecewiseMatrixFunction,
) -> Result<PiecewiseMatrixFunction> {
    let b_tilde = build_btilde(p, f, &core.config.quad)?;
    let xi = &core.d_pinv * b_tilde;
    f.antiderivative()
        .add(&core.psi0.mul_right(&RealMatrix::from_column_slice(xi.len(), 1, xi.as_slice()))?)
}

/// Sum of the Frobenius norms of the terms making up `L x`.
fn term_scale(l: &LinearVectorFunctional, x: &PiecewiseMatrixFunction, quad: &QuadratureConfig) -> Result<f64> {
    let mut s = 0.0;
    for term in l.points() {
        s += term.matrix.norm() * x.eval_at(term.t, term.effective_side())?.norm();
    }
    if let Some(w) = l.integral() {
        s += PiecewiseMatrixFunction::matmul(w, x)?.integrate_all(quad).norm();
    }
    Ok(s)
}

impl AlgebraicCore {
    pub fn build(p: &ProblemSpec, config: &SolverConfig) -> Result<Self> {
        p.validate()?;
        let (tol, quad) = (&config.tol, &config.quad);
        let psi = p.profile.antiderivative();
        let psi0 = build_psi0(p)?;
        let n_param = psi0.cols();
        debug_assert_eq!(n_param, p.param_count());

        let (d, d_scale) = d_with_scale(p, &psi0, quad)?;
        let f_tilde = p.forcing.antiderivative();
        let b_tilde = build_btilde(p, &p.forcing, quad)?;
        let PseudoInverse {
            pinv: d_pinv,
            rank: rank_d,
            null_projector: p_d,
            conull_projector: p_d_star,
        } = pseudoinverse_parts(&d, d_scale, tol)?;
        let r1 = n_param - rank_d;
        let d1 = p.m - rank_d;
        let p_d_r1 = independent_columns(&p_d, r1, tol)?;
        let p_d_star_d1 = independent_rows(&p_d_star, d1, tol)?;

        let xi = &d_pinv * &b_tilde;
        let forcing_response =
            f_tilde.add(&psi0.mul_right(&RealMatrix::from_column_slice(n_param, 1, xi.as_slice()))?)?;
        let x_r1 = psi0.mul_right(&p_d_r1)?;

        let functional = p.combined_functional()?;
        let functional_of_response = functional.apply_vector(&forcing_response, quad)?;
        let q = functional.apply(&x_r1, quad)?;
        let q_scale = term_scale(&functional, &x_r1, quad)?;
        let PseudoInverse {
            pinv: q_pinv,
            rank: rank_q,
            null_projector: p_q,
            conull_projector: p_q_star,
        } = pseudoinverse_parts(&q, q_scale, tol)?;
        let r2 = r1 - rank_q;
        let d2 = functional.out_dim() - rank_q;
        let p_q_r2 = independent_columns(&p_q, r2, tol)?;
        let p_q_star_d2 = independent_rows(&p_q_star, d2, tol)?;

        let ranks = Ranks {
            n_param,
            rank_d,
            r1,
            d1,
            rank_q,
            r2,
            d2,
        };
        debug!("algebraic core built: {ranks:?}");
        Ok(Self {
            psi,
            psi0,
            f_tilde,
            b_tilde,
            d,
            d_pinv,
            p_d,
            p_d_star,
            p_d_r1,
            p_d_star_d1,
            forcing_response,
            x_r1,
            functional,
            functional_of_response,
            q,
            q_pinv,
            p_q,
            p_q_star,
            p_q_r2,
            p_q_star_d2,
            ranks,
            config: config.clone(),
        })
    }

    fn check_delta(&self, delta: &RealVector) -> Result<()> {
        if delta.len() != self.functional.out_dim() {
            return Err(Error::DimensionMismatch(format!(
                "delta has length {}, expected k + q = {}",
                delta.len(),
                self.functional.out_dim()
            )));
        }
        Ok(())
    }

    /// `delta - L F`.
    pub fn boundary_defect(&self, delta: &RealVector) -> Result<RealVector> {
        self.check_delta(delta)?;
        Ok(delta - &self.functional_of_response)
    }
}

/// Both projector conditions; solvable iff each residual is below `solve_tol`.
pub fn check_solvability(core: &AlgebraicCore, delta: &RealVector) -> Result<SolvabilityReport> {
    let defect = core.boundary_defect(delta)?;
    let cond1_residual = max_abs((&core.p_d_star_d1 * &core.b_tilde).iter());
    let cond2_residual = max_abs((&core.p_q_star_d2 * defect).iter());
    let tol = core.config.tol.solve_tol;
    Ok(SolvabilityReport {
        cond1_residual,
        cond2_residual,
        solvable: cond1_residual < tol && cond2_residual < tol,
    })
}

/// The `r2`-parameter family of solutions. Unsolvable input is an error.
pub fn solve_family(core: &AlgebraicCore, delta: &RealVector) -> Result<SolutionFamily> {
    let report = check_solvability(core, delta)?;
    if !report.solvable {
        return Err(Error::Unsolvable(Box::new(report)));
    }
    let coeffs = &core.q_pinv * core.boundary_defect(delta)?;
    let particular = core
        .x_r1
        .mul_right(&RealMatrix::from_column_slice(coeffs.len(), 1, coeffs.as_slice()))?
        .add(&core.forcing_response)?;
    let basis = core.x_r1.mul_right(&core.p_q_r2)?;
    Ok(SolutionFamily {
        particular,
        basis,
        r2: core.ranks.r2,
    })
}

/// Residuals of a candidate solution `x` of the generating problem.
pub fn residual_norms(
    p: &ProblemSpec,
    x: &PiecewiseMatrixFunction,
    delta: &RealVector,
    config: &SolverConfig,
) -> Result<Residuals> {
    if x.shape() != (p.n, 1) {
        return Err(Error::DimensionMismatch(format!(
            "candidate has shape {:?}, expected {:?}",
            x.shape(),
            (p.n, 1)
        )));
    }
    let quad = &config.quad;
    let dx = x.derivative();
    let moment = PiecewiseMatrixFunction::matmul(&p.state_moment, x)?
        .add(&PiecewiseMatrixFunction::matmul(&p.rate_moment, &dx)?)?
        .integrate_all(quad);
    let r = dx.sub(&p.profile.mul_right(&moment)?)?.sub(&p.forcing)?;
    let sq = PiecewiseMatrixFunction::matmul(&r.transpose(), &r)?.integrate_all(quad)[(0, 0)];
    let functional = p.combined_functional()?;
    if delta.len() != functional.out_dim() {
        return Err(Error::DimensionMismatch(format!(
            "delta has length {}, expected {}",
            delta.len(),
            functional.out_dim()
        )));
    }
    let lx = functional.apply_vector(x, quad)?;
    Ok(Residuals {
        ide_residual: sq.max(0.0).sqrt(),
        cond_residual: max_abs((lx - delta).iter()),
    })
}
