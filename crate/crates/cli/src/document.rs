//! JSON problem documents.
//!
//! ```json
//! {
//!   "interval": [0.0, 1.0], "m": 1, "n": 1,
//!   "A": {"kind": "poly", "coeffs": [[[0.0]]]},
//!   "B": {"kind": "poly", "coeffs": [[[1.0]]]},
//!   "Phi": {"kind": "poly", "coeffs": [[[1.0]]]},
//!   "f": {"kind": "poly", "coeffs": [[[1.0]]]},
//!   "K": {"kind": "poly2", "coeffs": [[[[1.0]]]]},
//!   "impulses": [],
//!   "ell": {"points": [{"t": 0.0, "matrix": [[1.0]]}]},
//!   "alpha": [0.0]
//! }
//! ```
//!
//! `coeffs[i][j]` is the coefficient list of entry `(i, j)`, ascending in `t`.
//! For `poly2`, `coeffs[i][j][k][l]` multiplies `t^k s^l`.

use idereg_core::function_space::{BivariateKernel, Poly, PolyMatrix, PiecewiseMatrixFunction, Side};
use idereg_core::functionals::{ImpulseRecord, LinearVectorFunctional, PointTerm};
use idereg_core::linalg::{least_squares_min_norm, RealMatrix, RealVector, ToleranceConfig};
use idereg_core::{JumpModel, ProblemSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_FIT_DEGREE: usize = 6;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub interval: [f64; 2],
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: FunctionDoc,
    #[serde(rename = "B")]
    pub b: FunctionDoc,
    #[serde(rename = "Phi")]
    pub phi: FunctionDoc,
    pub f: FunctionDoc,
    #[serde(rename = "K", default)]
    pub k: Option<KernelDoc>,
    #[serde(default)]
    pub impulses: Vec<ImpulseDoc>,
    pub ell: FunctionalDoc,
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub options: OptionsDoc,
    /// Free-form notes; ignored by the solver.
    #[serde(default, rename = "description")]
    _notes: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionDoc {
    Poly {
        #[serde(default)]
        breakpoints: Vec<f64>,
        #[serde(default)]
        coeffs: Option<Vec<Vec<Vec<f64>>>>,
        #[serde(default)]
        pieces: Option<Vec<Vec<Vec<Vec<f64>>>>>,
    },
    Grid {
        ts: Vec<f64>,
        /// `values[k]` is the matrix at `ts[k]`.
        values: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        fit_degree: Option<usize>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelDoc {
    Poly2 { coeffs: Vec<Vec<Vec<Vec<f64>>>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpulseDoc {
    pub tau: f64,
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalDoc {
    pub points: Vec<PointDoc>,
    #[serde(default)]
    pub integral: Option<FunctionDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub t: f64,
    #[serde(default)]
    pub side: Option<SideDoc>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideDoc {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpModelDoc {
    Free,
    None,
}

impl From<JumpModelDoc> for JumpModel {
    fn from(j: JumpModelDoc) -> Self {
        match j {
            JumpModelDoc::Free => JumpModel::Free,
            JumpModelDoc::None => JumpModel::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Minnorm,
    Weighted,
}

/// Document-level defaults; every field has a command-line counterpart.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDoc {
    pub jump_model: Option<JumpModelDoc>,
    pub gauss_order: Option<usize>,
    pub rank_tol_rel: Option<f64>,
    pub solve_tol: Option<f64>,
    pub samples: Option<usize>,
    pub params: Option<Vec<f64>>,
    pub oracle_nodes: Option<usize>,
    pub objective: Option<Objective>,
    pub weight: Option<Vec<Vec<f64>>>,
    pub uref: Option<Vec<f64>>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::input(msg)
}

pub fn parse(text: &str) -> Result<ProblemDocument, CliError> {
    serde_json::from_str(text).map_err(|e| invalid(format!("cannot parse problem document: {e}")))
}

/// Row-major nested list to a matrix; `cols` is checked when given.
pub fn matrix(name: &str, rows: &[Vec<f64>], cols: Option<usize>) -> Result<RealMatrix, CliError> {
    let width = cols.unwrap_or_else(|| rows.first().map_or(0, Vec::len));
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(invalid(format!("{name}: row {i} has {} entries, expected {width}", r.len())));
    }
    Ok(RealMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]))
}

fn poly_matrix(name: &str, coeffs: &[Vec<Vec<f64>>], shape: (usize, usize)) -> Result<PolyMatrix, CliError> {
    if coeffs.len() != shape.0 || coeffs.iter().any(|r| r.len() != shape.1) {
        return Err(invalid(format!(
            "{name}: coefficient table must have shape {}x{}",
            shape.0, shape.1
        )));
    }
    Ok(PolyMatrix::from_fn(shape.0, shape.1, |i, j| Poly::new(coeffs[i][j].clone())))
}

/// Legendre polynomials `P_0..P_deg` as monomial coefficient lists.
fn legendre_basis(deg: usize) -> Vec<Poly> {
    let mut out = vec![Poly::constant(1.0), Poly::t()];
    for k in 1..deg {
        let kf = k as f64;
        let next = &(&Poly::t() * &out[k]).scale((2.0 * kf + 1.0) / (kf + 1.0)) + &out[k - 1].scale(-kf / (kf + 1.0));
        out.push(next);
    }
    out.truncate(deg + 1);
    out
}

/// Least-squares polynomial fit of sampled matrices, in the Legendre basis of
/// the interval mapped to `[-1, 1]`.
pub fn fit_grid(
    name: &str,
    (a, b): (f64, f64),
    ts: &[f64],
    values: &[Vec<Vec<f64>>],
    degree: usize,
    shape: (usize, usize),
) -> Result<PolyMatrix, CliError> {
    if ts.len() != values.len() {
        return Err(invalid(format!("{name}: {} nodes but {} samples", ts.len(), values.len())));
    }
    if ts.len() <= degree {
        return Err(invalid(format!(
            "{name}: fit of degree {degree} needs more than {degree} nodes, got {}",
            ts.len()
        )));
    }
    if let Some(t) = ts.iter().find(|t| !(**t >= a && **t <= b)) {
        return Err(invalid(format!("{name}: node {t} lies outside [{a}, {b}]")));
    }
    let samples: Vec<RealMatrix> = values
        .iter()
        .map(|v| matrix(name, v, Some(shape.1)))
        .collect::<Result<_, _>>()?;
    if samples.iter().any(|s| s.nrows() != shape.0) {
        return Err(invalid(format!("{name}: samples must have {} rows", shape.0)));
    }
    let basis = legendre_basis(degree);
    let (alpha, beta) = (2.0 / (b - a), -(a + b) / (b - a));
    let design = RealMatrix::from_fn(ts.len(), degree + 1, |k, j| basis[j].eval(alpha * ts[k] + beta));
    let tol = ToleranceConfig::default();
    let mut entries = Vec::with_capacity(shape.0 * shape.1);
    for i in 0..shape.0 {
        for j in 0..shape.1 {
            let y = RealVector::from_iterator(ts.len(), samples.iter().map(|s| s[(i, j)]));
            let c = least_squares_min_norm(&design, &y, &tol).map_err(|e| invalid(format!("{name}: {e}")))?;
            let p = basis
                .iter()
                .zip(c.iter())
                .fold(Poly::zero(), |acc, (pj, &cj)| &acc + &pj.scale(cj));
            entries.push(p.compose_affine(alpha, beta));
        }
    }
    Ok(PolyMatrix::from_entries(shape.0, shape.1, entries))
}

pub fn function(
    name: &str,
    doc: &FunctionDoc,
    domain: (f64, f64),
    shape: (usize, usize),
) -> Result<PiecewiseMatrixFunction, CliError> {
    let (a, b) = domain;
    let f = match doc {
        FunctionDoc::Poly {
            breakpoints,
            coeffs,
            pieces,
        } => {
            let pieces = match (coeffs, pieces) {
                (Some(c), None) if breakpoints.is_empty() => vec![poly_matrix(name, c, shape)?],
                (None, Some(ps)) => ps
                    .iter()
                    .map(|c| poly_matrix(name, c, shape))
                    .collect::<Result<_, _>>()?,
                _ => {
                    return Err(invalid(format!(
                        "{name}: give either \"coeffs\" or \"breakpoints\" with \"pieces\""
                    )))
                }
            };
            PiecewiseMatrixFunction::new(a, b, breakpoints.clone(), pieces)
        }
        FunctionDoc::Grid { ts, values, fit_degree } => {
            let piece = fit_grid(name, domain, ts, values, fit_degree.unwrap_or(DEFAULT_FIT_DEGREE), shape)?;
            PiecewiseMatrixFunction::polynomial(a, b, piece)
        }
    };
    f.map_err(|e| invalid(format!("{name}: {e}")))
}

fn kernel(doc: &KernelDoc, domain: (f64, f64), n: usize) -> Result<BivariateKernel, CliError> {
    let KernelDoc::Poly2 { coeffs } = doc;
    if coeffs.len() != n || coeffs.iter().any(|r| r.len() != n) {
        return Err(invalid(format!("K: coefficient table must have shape {n}x{n}")));
    }
    let entries = coeffs.iter().flatten().cloned().collect();
    BivariateKernel::new(domain.0, domain.1, n, n, entries).map_err(|e| invalid(format!("K: {e}")))
}

fn impulse(i: usize, doc: &ImpulseDoc, n: usize, tol: &ToleranceConfig) -> Result<ImpulseRecord, CliError> {
    let name = format!("impulses[{i}]");
    let e = matrix(&format!("{name}.E"), &doc.e, Some(n))?;
    let s = matrix(&format!("{name}.S"), &doc.s, Some(n))?;
    let gamma = RealVector::from_column_slice(&doc.gamma);
    ImpulseRecord::new(doc.tau, e, s, gamma, tol).map_err(|e| invalid(format!("{name}: {e}")))
}

fn functional(
    doc: &FunctionalDoc,
    domain: (f64, f64),
    q: usize,
    n: usize,
) -> Result<LinearVectorFunctional, CliError> {
    let mut points = Vec::with_capacity(doc.points.len());
    for (i, p) in doc.points.iter().enumerate() {
        let m = matrix(&format!("ell.points[{i}]"), &p.matrix, Some(n))?;
        let side = p.side.map(|s| match s {
            SideDoc::Left => Side::Left,
            SideDoc::Right => Side::Right,
        });
        points.push(PointTerm::new(p.t, side, m));
    }
    let integral = doc
        .integral
        .as_ref()
        .map(|w| function("ell.integral", w, domain, (q, n)))
        .transpose()?;
    LinearVectorFunctional::new(q, n, points, integral).map_err(|e| invalid(format!("ell: {e}")))
}

impl ProblemDocument {
    /// Builds and validates the problem. `jump_model` overrides the document.
    pub fn to_problem(&self, jump_model: Option<JumpModel>, tol: &ToleranceConfig) -> Result<ProblemSpec, CliError> {
        let [a, b] = self.interval;
        let (m, n) = (self.m, self.n);
        let dom = (a, b);
        let q = self.alpha.len();
        let impulses = self
            .impulses
            .iter()
            .enumerate()
            .map(|(i, d)| impulse(i, d, n, tol))
            .collect::<Result<_, _>>()?;
        let p = ProblemSpec {
            a,
            b,
            m,
            n,
            state_moment: function("A", &self.a, dom, (m, n))?,
            rate_moment: function("B", &self.b, dom, (m, n))?,
            profile: function("Phi", &self.phi, dom, (n, m))?,
            forcing: function("f", &self.f, dom, (n, 1))?,
            impulses,
            boundary: functional(&self.ell, dom, q, n)?,
            alpha: RealVector::from_column_slice(&self.alpha),
            control_kernel: self.k.as_ref().map(|k| kernel(k, dom, n)).transpose()?,
            jump_model: jump_model
                .or(self.options.jump_model.map(Into::into))
                .unwrap_or_default(),
        };
        p.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_basis_matches_closed_forms() {
        let p = legendre_basis(3);
        assert_eq!(p[2].coeffs(), &[-0.5, 0.0, 1.5]);
        for x in [-1.0, -0.3, 0.2, 1.0] {
            assert!((p[3].eval(x) - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-14);
        }
        assert_eq!(legendre_basis(0).len(), 1);
    }

    #[test]
    fn grid_fit_reproduces_polynomials() {
        let (a, b) = (1.0, 3.0);
        let f = |t: f64| 2.0 - t + 0.25 * t.powi(4);
        let ts: Vec<f64> = (0..20).map(|k| a + (b - a) * k as f64 / 19.0).collect();
        let values: Vec<Vec<Vec<f64>>> = ts.iter().map(|&t| vec![vec![f(t), -f(t)]]).collect();
        let pm = fit_grid("g", (a, b), &ts, &values, 6, (1, 2)).unwrap();
        for t in [1.0, 1.7, 2.9] {
            assert!((pm.entry(0, 0).eval(t) - f(t)).abs() < 1e-10);
            assert!((pm.entry(0, 1).eval(t) + f(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_fit_needs_enough_nodes() {
        let ts = [0.0, 0.5, 1.0];
        let values = vec![vec![vec![1.0]]; 3];
        assert!(fit_grid("g", (0.0, 1.0), &ts, &values, 6, (1, 1)).is_err());
        assert!(fit_grid("g", (0.0, 1.0), &ts, &values, 2, (1, 1)).is_ok());
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        assert!(matrix("E", &[vec![1.0, 2.0], vec![3.0]], None).is_err());
        assert!(matrix("E", &[vec![1.0, 2.0]], Some(3)).is_err());
    }
}
