//! Dense real linear algebra: Moore–Penrose pseudoinverses, numerical rank,
//! orthoprojectors onto kernels and cokernels, and selection of complete
//! systems of independent columns/rows from a projector.
//!
//! All rank decisions use a relative singular-value threshold
//! `sigma_i >= rank_tol_rel * sigma_max`, so verdicts do not change when a
//! matrix is rescaled. Matrices with zero rows or zero columns are legal
//! everywhere.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type RealVector = DVector<f64>;

/// Thresholds that turn exact rank conditions into floating-point decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Relative singular value cutoff for rank decisions.
    pub rank_tol_rel: f64,
    /// Absolute threshold on solvability residuals.
    pub solve_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_tol_rel: 1e-10,
            solve_tol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn new(rank_tol_rel: f64, solve_tol: f64) -> Result<Self> {
        for (name, v) in [("rank_tol_rel", rank_tol_rel), ("solve_tol", solve_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(Self {
            rank_tol_rel,
            solve_tol,
        })
    }

    /// Like [`ToleranceConfig::new`] but without the `< 1` bound on
    /// `solve_tol`. Used for deliberately loosened thresholds in diagnostics.
    pub fn unchecked(rank_tol_rel: f64, solve_tol: f64) -> Self {
        Self {
            rank_tol_rel,
            solve_tol,
        }
    }
}

pub(crate) fn ensure_finite(m: &RealMatrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

struct Decomposition {
    u: RealMatrix,
    sigma: Vec<f64>,
    v_t: RealMatrix,
}

fn decompose(m: &RealMatrix) -> Result<Decomposition> {
    ensure_finite(m, "matrix")?;
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(Decomposition {
            u: RealMatrix::zeros(r, 0),
            sigma: Vec::new(),
            v_t: RealMatrix::zeros(0, c),
        });
    }
    let a = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)]);
    let svd = a
        .thin_svd()
        .map_err(|e| Error::InvalidInput(format!("singular value decomposition failed: {e:?}")))?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let k = r.min(c);
    Ok(Decomposition {
        u: RealMatrix::from_fn(r, k, |i, j| u[(i, j)]),
        sigma: (0..k).map(|i| s[i]).collect(),
        v_t: RealMatrix::from_fn(k, c, |i, j| v[(j, i)]),
    })
}

fn cutoff(sigma: &[f64], scale: f64, tol: &ToleranceConfig) -> f64 {
    let smax = sigma.iter().copied().fold(scale, f64::max);
    // a zero matrix has no nonzero singular values at all
    if smax == 0.0 {
        f64::INFINITY
    } else {
        tol.rank_tol_rel * smax
    }
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &RealMatrix) -> Result<f64> {
    Ok(decompose(m)?.sigma.into_iter().fold(0.0, f64::max))
}

/// Pseudoinverse, rank and both orthoprojectors from one SVD.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoInverse {
    pub pinv: RealMatrix,
    pub rank: usize,
    /// `P_M = I - M^+ M`, onto `ker M`.
    pub null_projector: RealMatrix,
    /// `P_{M*} = I - M M^+`, onto `ker M^T`.
    pub conull_projector: RealMatrix,
}

/// Keeps singular values at or above `rank_tol_rel * max(sigma_max, scale)`.
/// A positive `scale` is for matrices formed as differences of terms of
/// that size, so that cancellation noise is not mistaken for rank.
///
/// The projectors are assembled from the retained singular vectors rather
/// than from `M^+ M`, which loses accuracy when `M` is ill-conditioned.
pub fn pseudoinverse_parts(m: &RealMatrix, scale: f64, tol: &ToleranceConfig) -> Result<PseudoInverse> {
    let d = decompose(m)?;
    let (r, c) = m.shape();
    let cut = cutoff(&d.sigma, scale, tol);
    let mut pinv = RealMatrix::zeros(c, r);
    let mut null_projector = RealMatrix::identity(c, c);
    let mut conull_projector = RealMatrix::identity(r, r);
    let mut rank = 0;
    for (i, &s) in d.sigma.iter().enumerate() {
        if s >= cut {
            rank += 1;
            let v = d.v_t.row(i).transpose();
            let u = d.u.column(i);
            pinv += (&v * u.transpose()) / s;
            null_projector -= &v * v.transpose();
            conull_projector -= u * u.transpose();
        }
    }
    Ok(PseudoInverse {
        pinv,
        rank,
        null_projector: symmetrize(null_projector),
        conull_projector: symmetrize(conull_projector),
    })
}

/// Moore–Penrose pseudoinverse via SVD, inverting only singular values at or
/// above `rank_tol_rel * sigma_max`.
pub fn pseudoinverse(m: &RealMatrix, tol: &ToleranceConfig) -> Result<RealMatrix> {
    Ok(pseudoinverse_parts(m, 0.0, tol)?.pinv)
}

pub fn numerical_rank(m: &RealMatrix, tol: &ToleranceConfig) -> Result<usize> {
    numerical_rank_with_scale(m, 0.0, tol)
}

pub fn numerical_rank_with_scale(m: &RealMatrix, scale: f64, tol: &ToleranceConfig) -> Result<usize> {
    let d = decompose(m)?;
    let cut = cutoff(&d.sigma, scale, tol);
    Ok(d.sigma.iter().filter(|&&s| s >= cut).count())
}

/// `P_M = I - M^+ M`, the orthoprojector onto `ker M`.
pub fn null_projector(m: &RealMatrix, tol: &ToleranceConfig) -> Result<RealMatrix> {
    Ok(pseudoinverse_parts(m, 0.0, tol)?.null_projector)
}

/// `P_{M*} = I - M M^+`, the orthoprojector onto `coker M = ker M^T`.
pub fn conull_projector(m: &RealMatrix, tol: &ToleranceConfig) -> Result<RealMatrix> {
    Ok(pseudoinverse_parts(m, 0.0, tol)?.conull_projector)
}

fn symmetrize(p: RealMatrix) -> RealMatrix {
    (&p + p.transpose()) * 0.5
}

/// Picks `r` linearly independent columns of the projector `p` by greedy
/// column pivoting (largest residual norm first, lowest index on ties) and
/// returns them in their original order.
pub fn independent_columns(p: &RealMatrix, r: usize, tol: &ToleranceConfig) -> Result<RealMatrix> {
    // projector singular values are 0 or 1
    let found = numerical_rank_with_scale(p, 1.0, tol)?;
    if found != r {
        return Err(Error::InconsistentRank { expected: r, found });
    }
    let c = p.ncols();
    let mut work = p.clone();
    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    for _ in 0..r {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..c).filter(|j| !chosen.contains(j)) {
            let nrm = work.column(j).norm();
            match best {
                Some((_, b)) if nrm <= b * (1.0 + 1e-12) => {}
                _ => best = Some((j, nrm)),
            }
        }
        let (j, nrm) = best.expect("rank r implies r candidate columns");
        chosen.push(j);
        let q = work.column(j) / nrm;
        for k in 0..c {
            let proj = q.dot(&work.column(k));
            let mut col = work.column_mut(k);
            col.axpy(-proj, &q, 1.0);
        }
    }
    chosen.sort_unstable();
    Ok(p.select_columns(chosen.iter()))
}

/// Row dual of [`independent_columns`].
pub fn independent_rows(p: &RealMatrix, d: usize, tol: &ToleranceConfig) -> Result<RealMatrix> {
    Ok(independent_columns(&p.transpose(), d, tol)?.transpose())
}

/// Minimum-norm least-squares solution `M^+ y`.
pub fn least_squares_min_norm(
    m: &RealMatrix,
    y: &RealVector,
    tol: &ToleranceConfig,
) -> Result<RealVector> {
    if y.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, matrix has {} rows",
            y.len(),
            m.nrows()
        )));
    }
    ensure_finite(&RealMatrix::from_column_slice(y.len(), 1, y.as_slice()), "right-hand side")?;
    Ok(pseudoinverse(m, tol)? * y)
}

/// Largest absolute entry; zero for empty inputs.
pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
