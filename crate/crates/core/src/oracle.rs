//! Brute-force discretization used to cross-check solvability verdicts.
//!
//! Each impulse subinterval carries its own `M` uniform nodes, endpoints
//! included, so the grid values on either side of an impulse instant are
//! independent unknowns. Derivatives use 7-point local Lagrange stencils
//! (exact up to degree 6). Integrals use trapezoid weights with a
//! minimum-norm correction that makes them exact up to degree
//! `min(11, M - 1)`. The IDE is imposed at every node, one-sided at the
//! subinterval ends, together with `L x = delta`, and the system is solved by
//! dense minimum-norm least squares.
//!
//! The IDE rows are scaled by the square root of the plain trapezoid weights,
//! so the reported residual approximates
//! `(|x' - Phi \int (A x + B x') - f|_{L2}^2 + |L x - delta|^2)^{1/2}`.
//!
//! Only [`ProblemSpec`] and the functionals are read here, never the algebraic
//! reduction.

use crate::error::{Error, Result};
use crate::function_space::Side;
use crate::functionals::LinearVectorFunctional;
use crate::generating::SolutionFamily;
use crate::linalg::{least_squares_min_norm, RealMatrix, RealVector, ToleranceConfig};
use crate::problem::ProblemSpec;

const STENCIL: usize = 7;
const MAX_QUAD_DEGREE: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub nodes_per_subinterval: usize,
    pub residual_tol: f64,
    pub margin_band: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            nodes_per_subinterval: 64,
            residual_tol: 1e-6,
            margin_band: 10.0,
        }
    }
}

impl OracleConfig {
    pub fn new(nodes_per_subinterval: usize, residual_tol: f64, margin_band: f64) -> Result<Self> {
        if nodes_per_subinterval < 8 {
            return Err(Error::InvalidInput(format!(
                "oracle needs at least 8 nodes per subinterval, got {nodes_per_subinterval}"
            )));
        }
        if !(residual_tol > 0.0 && residual_tol.is_finite()) || !(margin_band >= 1.0 && margin_band.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "invalid oracle thresholds residual_tol = {residual_tol}, margin_band = {margin_band}"
            )));
        }
        Ok(Self {
            nodes_per_subinterval,
            residual_tol,
            margin_band,
        })
    }

    pub fn with_nodes(self, nodes_per_subinterval: usize) -> Result<Self> {
        Self::new(nodes_per_subinterval, self.residual_tol, self.margin_band)
    }
}

/// Grid values of a discrete solution; `values` is `nodes x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSolution {
    pub nodes: Vec<(f64, Side)>,
    pub values: RealMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub min_residual: f64,
    pub grid: SampledSolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Solvable,
    Unsolvable,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Solvable => "solvable",
            Verdict::Unsolvable => "unsolvable",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

struct Block {
    lo: f64,
    hi: f64,
    ts: Vec<f64>,
    /// `diff[i]`: (first stencil node, weights) for `x'(t_i)`.
    diff: Vec<(usize, [f64; STENCIL])>,
    quad: Vec<f64>,
    trap: Vec<f64>,
}

impl Block {
    fn new(lo: f64, hi: f64, m: usize) -> Result<Self> {
        let h = (hi - lo) / (m - 1) as f64;
        let ts: Vec<f64> = (0..m)
            .map(|i| if i + 1 == m { hi } else { lo + i as f64 * h })
            .collect();
        let diff = (0..m)
            .map(|i| {
                let start = i.saturating_sub(STENCIL / 2).min(m - STENCIL);
                let (_, d) = lagrange(&ts[start..start + STENCIL], ts[i]);
                (start, d)
            })
            .collect();
        let mut trap = vec![h; m];
        trap[0] = h / 2.0;
        trap[m - 1] = h / 2.0;
        let quad = corrected_weights(&ts, &trap, lo, hi)?;
        Ok(Self {
            lo,
            hi,
            ts,
            diff,
            quad,
            trap,
        })
    }

    fn side(&self, i: usize) -> Side {
        if i + 1 == self.ts.len() {
            Side::Left
        } else {
            Side::Right
        }
    }

    fn contains(&self, t: f64, side: Side, first: bool, last: bool) -> bool {
        match side {
            Side::Right => (t >= self.lo && t < self.hi) || (last && t == self.hi),
            Side::Left => (t > self.lo && t <= self.hi) || (first && t == self.lo),
        }
    }

    /// Interpolation stencil for `x(t)`.
    fn interp(&self, t: f64) -> (usize, [f64; STENCIL]) {
        let m = self.ts.len();
        let h = (self.hi - self.lo) / (m - 1) as f64;
        let centre = ((t - self.lo) / h).round().max(0.0) as usize;
        let start = centre.saturating_sub(STENCIL / 2).min(m - STENCIL);
        let (v, _) = lagrange(&self.ts[start..start + STENCIL], t);
        (start, v)
    }
}

/// Lagrange basis values and derivatives at `t`.
fn lagrange(nodes: &[f64], t: f64) -> ([f64; STENCIL], [f64; STENCIL]) {
    let mut val = [0.0; STENCIL];
    let mut der = [0.0; STENCIL];
    for l in 0..STENCIL {
        let mut v = 1.0;
        for k in (0..STENCIL).filter(|&k| k != l) {
            v *= (t - nodes[k]) / (nodes[l] - nodes[k]);
        }
        val[l] = v;
        let mut d = 0.0;
        for k in (0..STENCIL).filter(|&k| k != l) {
            let mut term = 1.0 / (nodes[l] - nodes[k]);
            for j in (0..STENCIL).filter(|&j| j != l && j != k) {
                term *= (t - nodes[j]) / (nodes[l] - nodes[j]);
            }
            d += term;
        }
        der[l] = d;
    }
    (val, der)
}

/// `trap + V (V^T V)^{-1} (mu - V^T trap)` with a Legendre basis `V`.
fn corrected_weights(ts: &[f64], trap: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    let deg = MAX_QUAD_DEGREE.min(ts.len() - 1);
    let half = (hi - lo) / 2.0;
    let mut v = RealMatrix::zeros(ts.len(), deg + 1);
    for (i, &t) in ts.iter().enumerate() {
        let x = (t - lo) / half - 1.0;
        let (mut p0, mut p1) = (1.0, x);
        v[(i, 0)] = 1.0;
        if deg >= 1 {
            v[(i, 1)] = x;
        }
        for k in 2..=deg {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            v[(i, k)] = p2;
            p0 = p1;
            p1 = p2;
        }
    }
    let mut mu = RealVector::zeros(deg + 1);
    mu[0] = 2.0 * half;
    let w0 = RealVector::from_column_slice(trap);
    let defect = mu - v.transpose() * &w0;
    let gram = v.transpose() * &v;
    let coef = gram
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("degenerate oracle grid".into()))?
        .solve(&defect);
    Ok((w0 + v * coef).iter().copied().collect())
}

struct Grid {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    total: usize,
}

impl Grid {
    fn new(p: &ProblemSpec, m: usize) -> Result<Self> {
        let mut cuts = vec![p.a];
        cuts.extend(p.impulse_instants());
        cuts.push(p.b);
        let blocks = cuts
            .windows(2)
            .map(|w| Block::new(w[0], w[1], m))
            .collect::<Result<Vec<_>>>()?;
        let offsets = (0..blocks.len()).map(|j| j * m).collect();
        Ok(Self {
            total: blocks.len() * m,
            blocks,
            offsets,
        })
    }

    fn nodes(&self) -> impl Iterator<Item = (usize, &Block, usize)> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(move |(j, b)| (0..b.ts.len()).map(move |i| (self.offsets[j] + i, b, i)))
    }

    fn locate(&self, t: f64, side: Side) -> Result<(usize, &Block)> {
        let last = self.blocks.len() - 1;
        self.blocks
            .iter()
            .enumerate()
            .find(|(j, b)| b.contains(t, side, *j == 0, *j == last))
            .map(|(j, b)| (self.offsets[j], b))
            .ok_or(Error::OutsideDomain {
                t,
                a: self.blocks[0].lo,
                b: self.blocks[last].hi,
            })
    }
}

fn add_block(target: &mut RealMatrix, r: usize, c: usize, m: &RealMatrix, scale: f64) {
    let mut view = target.view_mut((r, c), m.shape());
    view += m * scale;
}

/// Rows of `L x` over the grid unknowns.
fn functional_rows(l: &LinearVectorFunctional, grid: &Grid, n: usize) -> Result<RealMatrix> {
    let mut rows = RealMatrix::zeros(l.out_dim(), grid.total * n);
    for term in l.points() {
        let (off, block) = grid.locate(term.t, term.effective_side())?;
        let (start, w) = block.interp(term.t);
        for (k, wk) in w.iter().enumerate() {
            add_block(&mut rows, 0, (off + start + k) * n, &term.matrix, *wk);
        }
    }
    if let Some(weight) = l.integral() {
        for (g, block, i) in grid.nodes() {
            let wt = weight.eval_at(block.ts[i], block.side(i))?;
            add_block(&mut rows, 0, g * n, &wt, block.quad[i]);
        }
    }
    Ok(rows)
}

/// Least-squares discretization of the (optionally controlled) problem.
pub fn oracle_solve(
    p: &ProblemSpec,
    delta: &RealVector,
    u: Option<&RealVector>,
    cfg: &OracleConfig,
) -> Result<OracleSolution> {
    p.validate()?;
    if cfg.nodes_per_subinterval < 8 {
        return Err(Error::InvalidInput("oracle needs at least 8 nodes per subinterval".into()));
    }
    let l = p.combined_functional()?;
    if delta.len() != l.out_dim() {
        return Err(Error::DimensionMismatch(format!(
            "delta has length {}, expected {}",
            delta.len(),
            l.out_dim()
        )));
    }
    let kernel = match u {
        Some(u) => {
            if u.len() != p.n {
                return Err(Error::DimensionMismatch(format!(
                    "control has length {}, expected n = {}",
                    u.len(),
                    p.n
                )));
            }
            Some((p.control_kernel.as_ref().ok_or(Error::NoControlKernel)?, u))
        }
        None => None,
    };

    let (n, m) = (p.n, p.m);
    let grid = Grid::new(p, cfg.nodes_per_subinterval)?;
    let unknowns = grid.total * n;

    // x' as an operator on the unknowns
    let mut deriv = RealMatrix::zeros(unknowns, unknowns);
    for (g, block, i) in grid.nodes() {
        let base = g - i;
        let (start, w) = block.diff[i];
        for (k, wk) in w.iter().enumerate() {
            for c in 0..n {
                deriv[(g * n + c, (base + start + k) * n + c)] += wk;
            }
        }
    }

    // c1 = \int (A x + B x')
    let mut moment_a = RealMatrix::zeros(m, unknowns);
    let mut moment_b = RealMatrix::zeros(m, unknowns);
    let mut profile = RealMatrix::zeros(unknowns, m);
    let mut rhs = RealVector::zeros(unknowns + l.out_dim());
    let mut row_scale = RealVector::zeros(unknowns);
    let quad_nodes: Vec<(f64, f64)> = grid
        .nodes()
        .map(|(_, block, i)| (block.ts[i], block.quad[i]))
        .collect();
    for (g, block, i) in grid.nodes() {
        let (t, side) = (block.ts[i], block.side(i));
        add_block(&mut moment_a, 0, g * n, &p.state_moment.eval_at(t, side)?, block.quad[i]);
        add_block(&mut moment_b, 0, g * n, &p.rate_moment.eval_at(t, side)?, block.quad[i]);
        profile
            .view_mut((g * n, 0), (n, m))
            .copy_from(&p.profile.eval_at(t, side)?);
        let mut f = p.forcing.eval_at(t, side)?.column(0).into_owned();
        if let Some((k, u)) = kernel {
            for &(s, w) in &quad_nodes {
                f += k.eval(t, s) * u * w;
            }
        }
        rhs.rows_mut(g * n, n).copy_from(&f);
        row_scale.rows_mut(g * n, n).fill(block.trap[i].sqrt());
    }
    let moments = moment_a + moment_b * &deriv;
    let ide = &deriv - profile * moments;

    let mut system = RealMatrix::zeros(unknowns + l.out_dim(), unknowns);
    system.view_mut((0, 0), (unknowns, unknowns)).copy_from(&ide);
    system
        .view_mut((unknowns, 0), (l.out_dim(), unknowns))
        .copy_from(&functional_rows(&l, &grid, n)?);
    rhs.rows_mut(unknowns, l.out_dim()).copy_from(delta);
    for r in 0..unknowns {
        let s = row_scale[r];
        system.row_mut(r).scale_mut(s);
        rhs[r] *= s;
    }

    let tol = ToleranceConfig::unchecked(1e-11, 1e-8);
    let x = least_squares_min_norm(&system, &rhs, &tol)?;
    let min_residual = (&system * &x - &rhs).norm();
    log::debug!(
        "oracle: {} unknowns, {} equations, residual {min_residual:e}",
        unknowns,
        system.nrows()
    );

    let nodes = grid.nodes().map(|(_, b, i)| (b.ts[i], b.side(i))).collect();
    let values = RealMatrix::from_fn(grid.total, n, |g, c| x[g * n + c]);
    Ok(OracleSolution {
        min_residual,
        grid: SampledSolution { nodes, values },
    })
}

pub fn classify(min_residual: f64, cfg: &OracleConfig) -> Verdict {
    if min_residual < cfg.residual_tol {
        Verdict::Solvable
    } else if min_residual > cfg.margin_band * cfg.residual_tol {
        Verdict::Unsolvable
    } else {
        Verdict::Indeterminate
    }
}

pub fn oracle_solvable(
    p: &ProblemSpec,
    delta: &RealVector,
    u: Option<&RealVector>,
    cfg: &OracleConfig,
) -> Result<Verdict> {
    Ok(classify(oracle_solve(p, delta, u, cfg)?.min_residual, cfg))
}

/// `min_c max_node |fam(t, c) - grid(t)|`, with `c` fitted by least squares.
pub fn family_distance(fam: &SolutionFamily, grid: &SampledSolution) -> Result<f64> {
    let n = fam.particular.rows();
    if grid.values.shape() != (grid.nodes.len(), n) {
        return Err(Error::DimensionMismatch(format!(
            "grid values have shape {:?}, expected ({}, {n})",
            grid.values.shape(),
            grid.nodes.len()
        )));
    }
    let len = grid.nodes.len() * n;
    let mut target = RealVector::zeros(len);
    let mut basis = RealMatrix::zeros(len, fam.r2);
    for (g, &(t, side)) in grid.nodes.iter().enumerate() {
        let part = fam.particular.eval_at(t, side)?;
        for c in 0..n {
            target[g * n + c] = grid.values[(g, c)] - part[(c, 0)];
        }
        if fam.r2 > 0 {
            basis.view_mut((g * n, 0), (n, fam.r2)).copy_from(&fam.basis.eval_at(t, side)?);
        }
    }
    let coef = least_squares_min_norm(&basis, &target, &ToleranceConfig::default())?;
    let diff = target - basis * coef;
    Ok(diff.amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generating::{solve_family, AlgebraicCore};
    use crate::samples::s1_problem;
    use crate::SolverConfig;

    fn run(f: f64, m: usize) -> OracleSolution {
        let p = s1_problem(f);
        let cfg = OracleConfig::default().with_nodes(m).unwrap();
        oracle_solve(&p, &p.delta(), None, &cfg).unwrap()
    }

    #[test]
    fn corrected_weights_are_exact() {
        let block = Block::new(0.3, 1.7, 20).unwrap();
        for k in 0..=11 {
            let approx: f64 = block.ts.iter().zip(&block.quad).map(|(t, w)| w * t.powi(k)).sum();
            let exact = (1.7f64.powi(k + 1) - 0.3f64.powi(k + 1)) / (k + 1) as f64;
            assert!((approx - exact).abs() < 1e-12 * exact.abs().max(1.0), "degree {k}");
        }
    }

    #[test]
    fn stencils_differentiate_sextics() {
        let block = Block::new(-1.0, 2.0, 9).unwrap();
        let f = |t: f64| t.powi(6) - 2.0 * t.powi(3) + t;
        let df = |t: f64| 6.0 * t.powi(5) - 6.0 * t.powi(2) + 1.0;
        for (i, &t) in block.ts.iter().enumerate() {
            let (start, w) = block.diff[i];
            let approx: f64 = (0..STENCIL).map(|k| w[k] * f(block.ts[start + k])).sum();
            assert!((approx - df(t)).abs() < 1e-9, "node {i}");
        }
        let (start, w) = block.interp(0.123);
        let approx: f64 = (0..STENCIL).map(|k| w[k] * f(block.ts[start + k])).sum();
        assert!((approx - f(0.123)).abs() < 1e-12);
    }

    #[test]
    fn s1_forced_residual_near_one() {
        let r = run(1.0, 64).min_residual;
        assert!((r - 1.0).abs() < 0.02, "{r}");
        assert_eq!(classify(r, &OracleConfig::default()), Verdict::Unsolvable);
    }

    #[test]
    fn s1_homogeneous_is_exact() {
        let sol = run(0.0, 64);
        assert!(sol.min_residual < 1e-8);
        let p = s1_problem(0.0);
        let core = AlgebraicCore::build(&p, &SolverConfig::default()).unwrap();
        let fam = solve_family(&core, &p.delta()).unwrap();
        assert!(family_distance(&fam, &sol.grid).unwrap() < 1e-6);
    }

    #[test]
    fn control_repairs_s1() {
        let p = s1_problem(1.0);
        let cfg = OracleConfig::default();
        let u = RealVector::from_element(1, -1.0);
        assert_eq!(oracle_solvable(&p, &p.delta(), Some(&u), &cfg).unwrap(), Verdict::Solvable);
        assert_eq!(oracle_solvable(&p, &p.delta(), None, &cfg).unwrap(), Verdict::Unsolvable);
    }

    #[test]
    fn verdict_bands() {
        let cfg = OracleConfig::default();
        assert_eq!(classify(5e-7, &cfg), Verdict::Solvable);
        assert_eq!(classify(5e-6, &cfg), Verdict::Indeterminate);
        assert_eq!(classify(2e-5, &cfg), Verdict::Unsolvable);
    }

    #[test]
    fn config_validation() {
        assert!(OracleConfig::new(7, 1e-6, 10.0).is_err());
        assert!(OracleConfig::new(8, 0.0, 10.0).is_err());
        assert!(OracleConfig::new(8, 1e-6, 10.0).is_ok());
    }

    #[test]
    fn family_distance_detects_offsets() {
        let p = s1_problem(0.0);
        let core = AlgebraicCore::build(&p, &SolverConfig::default()).unwrap();
        let fam = solve_family(&core, &p.delta()).unwrap();
        let nodes: Vec<(f64, Side)> = (0..11).map(|i| (i as f64 / 10.0, Side::Right)).collect();
        let on = RealMatrix::from_fn(11, 1, |i, _| 3.0 * nodes[i].0);
        let grid = SampledSolution { nodes: nodes.clone(), values: on.clone() };
        assert!(family_distance(&fam, &grid).unwrap() < 1e-12);
        let off = SampledSolution { nodes, values: on.add_scalar(0.1) };
        assert!(family_distance(&fam, &off).unwrap() >= 0.1 - 1e-6);
    }
}
