use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

use super::poly::{Poly, PolyMatrix};
use super::quadrature::QuadratureConfig;

/// Which one-sided limit to take at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Matrix-valued function on `[a, b]` that is polynomial on each subinterval
/// between consecutive breakpoints.
///
/// Values at a breakpoint are only defined as one-sided limits; callers pick
/// the side explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMatrixFunction {
    a: f64,
    b: f64,
    breakpoints: Vec<f64>,
    pieces: Vec<PolyMatrix>,
    rows: usize,
    cols: usize,
}

fn same_point(x: f64, y: f64, scale: f64) -> bool {
    (x - y).abs() <= 1e-14 * scale.max(1.0)
}

impl PiecewiseMatrixFunction {
    pub fn new(a: f64, b: f64, breakpoints: Vec<f64>, pieces: Vec<PolyMatrix>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput(format!("invalid domain [{a}, {b}]")));
        }
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints require {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        let mut prev = a;
        for &bp in &breakpoints {
            if !(bp > prev && bp < b) {
                return Err(Error::InvalidInput(format!(
                    "breakpoints must be strictly increasing inside ({a}, {b}); got {bp}"
                )));
            }
            prev = bp;
        }
        let (rows, cols) = (pieces[0].rows(), pieces[0].cols());
        if pieces.iter().any(|p| p.rows() != rows || p.cols() != cols) {
            return Err(Error::DimensionMismatch("pieces have differing shapes".into()));
        }
        if pieces.iter().any(|p| p.entries().iter().any(|e| !e.is_finite())) {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        Ok(Self {
            a,
            b,
            breakpoints,
            pieces,
            rows,
            cols,
        })
    }

    pub fn polynomial(a: f64, b: f64, piece: PolyMatrix) -> Result<Self> {
        Self::new(a, b, Vec::new(), vec![piece])
    }

    pub fn constant(a: f64, b: f64, m: &RealMatrix) -> Result<Self> {
        Self::polynomial(a, b, PolyMatrix::constant(m))
    }

    pub fn zeros(a: f64, b: f64, rows: usize, cols: usize) -> Result<Self> {
        Self::polynomial(a, b, PolyMatrix::zeros(rows, cols))
    }

    pub fn identity(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::constant(a, b, &RealMatrix::identity(n, n))
    }

    /// `n x n` jump carrier: zero up to and including `tau` from the left,
    /// `I_n` for `t > tau`.
    pub fn step(a: f64, b: f64, tau: f64, n: usize) -> Result<Self> {
        if !(tau > a && tau < b) {
            return Err(Error::OutsideDomain { t: tau, a, b });
        }
        Self::new(
            a,
            b,
            vec![tau],
            vec![
                PolyMatrix::zeros(n, n),
                PolyMatrix::constant(&RealMatrix::identity(n, n)),
            ],
        )
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[PolyMatrix] {
        &self.pieces
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(PolyMatrix::max_degree).max().unwrap_or(0)
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t.is_finite() && t >= self.a && t <= self.b {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                t,
                a: self.a,
                b: self.b,
            })
        }
    }

    /// Index of the piece governing the `side` limit at `t`.
    pub fn piece_index(&self, t: f64, side: Side) -> usize {
        let side = if t <= self.a {
            Side::Right
        } else if t >= self.b {
            Side::Left
        } else {
            side
        };
        match side {
            Side::Right => self.breakpoints.iter().filter(|&&bp| bp <= t).count(),
            Side::Left => self.breakpoints.iter().filter(|&&bp| bp < t).count(),
        }
    }

    pub fn eval_at(&self, t: f64, side: Side) -> Result<RealMatrix> {
        self.check_t(t)?;
        Ok(self.pieces[self.piece_index(t, side)].eval(t))
    }

    /// Entrywise integral over `[lo, hi]` by composite Gauss–Legendre, one
    /// panel per polynomial piece.
    pub fn integrate(&self, lo: f64, hi: f64, q: &QuadratureConfig) -> Result<RealMatrix> {
        self.check_t(lo)?;
        self.check_t(hi)?;
        if lo > hi {
            return Err(Error::ReversedBounds { lo, hi });
        }
        let mut acc = RealMatrix::zeros(self.rows, self.cols);
        let mut cuts = vec![lo];
        cuts.extend(self.breakpoints.iter().copied().filter(|&bp| bp > lo && bp < hi));
        cuts.push(hi);
        for w in cuts.windows(2) {
            let (p0, p1) = (w[0], w[1]);
            if p1 <= p0 {
                continue;
            }
            let piece = &self.pieces[self.piece_index(0.5 * (p0 + p1), Side::Right)];
            for (t, wt) in q.panel(p0, p1) {
                acc += piece.eval(t) * wt;
            }
        }
        Ok(acc)
    }

    pub fn integrate_all(&self, q: &QuadratureConfig) -> RealMatrix {
        self.integrate(self.a, self.b, q).expect("full domain is valid")
    }

    /// `G(t) = \int_a^t F(s) ds`, continuous across breakpoints.
    pub fn antiderivative(&self) -> Self {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut left = self.a;
        let mut carry = RealMatrix::zeros(self.rows, self.cols);
        for (k, piece) in self.pieces.iter().enumerate() {
            let right = self.breakpoints.get(k).copied().unwrap_or(self.b);
            let prim = piece.map(Poly::integral);
            let offset = &carry - prim.eval(left);
            let shifted = PolyMatrix::from_fn(self.rows, self.cols, |i, j| {
                prim.entry(i, j) + &Poly::constant(offset[(i, j)])
            });
            carry = shifted.eval(right);
            pieces.push(shifted);
            left = right;
        }
        Self {
            pieces,
            ..self.clone_shape()
        }
    }

    /// Piecewise derivative. Jumps at breakpoints are discarded, so this is
    /// the derivative almost everywhere.
    pub fn derivative(&self) -> Self {
        Self {
            pieces: self.pieces.iter().map(|p| p.map(Poly::derivative)).collect(),
            ..self.clone_shape()
        }
    }

    fn clone_shape(&self) -> Self {
        Self {
            a: self.a,
            b: self.b,
            breakpoints: self.breakpoints.clone(),
            pieces: Vec::new(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        let scale = (self.b - self.a).abs();
        if same_point(self.a, other.a, scale) && same_point(self.b, other.b, scale) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "domains [{}, {}] and [{}, {}] differ",
                self.a, self.b, other.a, other.b
            )))
        }
    }

    /// Re-expresses the function on a finer breakpoint set. Points that
    /// coincide with existing breakpoints are merged.
    pub fn refine(&self, extra: &[f64]) -> Self {
        let bps = merge_breakpoints(self.a, self.b, &self.breakpoints, extra);
        self.on_breakpoints(&bps)
    }

    fn on_breakpoints(&self, bps: &[f64]) -> Self {
        let mut cuts = vec![self.a];
        cuts.extend_from_slice(bps);
        cuts.push(self.b);
        let pieces = cuts
            .windows(2)
            .map(|w| self.pieces[self.piece_index(0.5 * (w[0] + w[1]), Side::Right)].clone())
            .collect();
        Self {
            a: self.a,
            b: self.b,
            breakpoints: bps.to_vec(),
            pieces,
            rows: self.rows,
            cols: self.cols,
        }
    }

    fn aligned(f: &Self, g: &Self) -> Result<(Self, Self)> {
        f.check_domain(g)?;
        let bps = merge_breakpoints(f.a, f.b, &f.breakpoints, &g.breakpoints);
        Ok((f.on_breakpoints(&bps), g.on_breakpoints(&bps)))
    }

    /// Pointwise `alpha * f + beta * g`.
    pub fn combine(alpha: f64, f: &Self, beta: f64, g: &Self) -> Result<Self> {
        if f.shape() != g.shape() {
            return Err(Error::DimensionMismatch(format!(
                "cannot combine {:?} with {:?}",
                f.shape(),
                g.shape()
            )));
        }
        let (f, g) = Self::aligned(f, g)?;
        let pieces = f
            .pieces
            .iter()
            .zip(&g.pieces)
            .map(|(p, q)| p.lin_comb(alpha, q, beta))
            .collect();
        Ok(Self { pieces, ..f })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::combine(1.0, self, 1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::combine(1.0, self, -1.0, other)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            pieces: self.pieces.iter().map(|p| p.map(|e| e.scale(s))).collect(),
            ..self.clone_shape()
        }
    }

    /// Pointwise matrix product `f(t) g(t)`.
    pub fn matmul(f: &Self, g: &Self) -> Result<Self> {
        if f.cols != g.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {:?} by {:?}",
                f.shape(),
                g.shape()
            )));
        }
        let (fa, ga) = Self::aligned(f, g)?;
        let pieces = fa.pieces.iter().zip(&ga.pieces).map(|(p, q)| p.matmul(q)).collect();
        Ok(Self {
            pieces,
            cols: g.cols,
            ..fa
        })
    }

    /// `f(t) m` for a constant matrix `m`.
    pub fn mul_right(&self, m: &RealMatrix) -> Result<Self> {
        if self.cols != m.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {:?} by constant {:?}",
                self.shape(),
                m.shape()
            )));
        }
        Ok(Self {
            pieces: self.pieces.iter().map(|p| p.mul_const_right(m)).collect(),
            cols: m.ncols(),
            ..self.clone_shape()
        })
    }

    /// `m f(t)` for a constant matrix `m`.
    pub fn mul_left(&self, m: &RealMatrix) -> Result<Self> {
        if m.ncols() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply constant {:?} by {:?}",
                m.shape(),
                self.shape()
            )));
        }
        Ok(Self {
            pieces: self.pieces.iter().map(|p| p.mul_const_left(m)).collect(),
            rows: m.nrows(),
            ..self.clone_shape()
        })
    }

    /// Horizontal concatenation `[f_1(t), f_2(t), ...]`.
    pub fn hcat(parts: &[&Self]) -> Result<Self> {
        Self::concat(parts, true)
    }

    /// Vertical concatenation.
    pub fn vcat(parts: &[&Self]) -> Result<Self> {
        Self::concat(parts, false)
    }

    fn concat(parts: &[&Self], horizontal: bool) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("nothing to concatenate".into()))?;
        let mut bps = first.breakpoints.clone();
        for p in &parts[1..] {
            first.check_domain(p)?;
            let ok = if horizontal {
                p.rows == first.rows
            } else {
                p.cols == first.cols
            };
            if !ok {
                return Err(Error::DimensionMismatch("concatenated shapes disagree".into()));
            }
            bps = merge_breakpoints(first.a, first.b, &bps, &p.breakpoints);
        }
        let aligned: Vec<Self> = parts.iter().map(|p| p.on_breakpoints(&bps)).collect();
        let pieces = (0..=bps.len())
            .map(|k| {
                let ps: Vec<&PolyMatrix> = aligned.iter().map(|f| &f.pieces[k]).collect();
                if horizontal {
                    PolyMatrix::hcat(&ps)
                } else {
                    PolyMatrix::vcat(&ps)
                }
            })
            .collect::<Vec<_>>();
        Self::new(first.a, first.b, bps, pieces)
    }

    pub fn transpose(&self) -> Self {
        Self {
            pieces: self.pieces.iter().map(PolyMatrix::transpose).collect(),
            rows: self.cols,
            cols: self.rows,
            ..self.clone_shape()
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::DimensionMismatch(format!(
                "column {bad} out of range for {} columns",
                self.cols
            )));
        }
        Ok(Self {
            pieces: self.pieces.iter().map(|p| p.select_columns(cols)).collect(),
            cols: cols.len(),
            ..self.clone_shape()
        })
    }

    pub fn column(&self, j: usize) -> Result<Self> {
        self.select_columns(&[j])
    }
}

/// Sorted union of two breakpoint sets inside `(a, b)`, merging points that
/// agree to rounding.
pub(crate) fn merge_breakpoints(a: f64, b: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    let scale = b - a;
    let mut all: Vec<f64> = x
        .iter()
        .chain(y)
        .copied()
        .filter(|&t| t > a && t < b)
        .collect();
    all.sort_by(|p, q| p.partial_cmp(q).expect("finite breakpoints"));
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for t in all {
        match out.last() {
            Some(&last) if same_point(last, t, scale) => {}
            _ => out.push(t),
        }
    }
    out
}
