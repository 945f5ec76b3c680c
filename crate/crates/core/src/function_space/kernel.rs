use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

use super::piecewise::PiecewiseMatrixFunction;
use super::poly::{Poly, PolyMatrix};
use super::quadrature::QuadratureConfig;

/// Matrix of bivariate polynomials `K(t, s) = sum_{k,l} c_{kl} t^k s^l` on
/// `[a, b] x [a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateKernel {
    a: f64,
    b: f64,
    rows: usize,
    cols: usize,
    /// Row-major entries; each entry is the grid `c[k][l]`.
    entries: Vec<Vec<Vec<f64>>>,
}

impl BivariateKernel {
    pub fn new(a: f64, b: f64, rows: usize, cols: usize, entries: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput(format!("invalid domain [{a}, {b}]")));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "kernel of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().flatten().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite kernel coefficient".into()));
        }
        Ok(Self {
            a,
            b,
            rows,
            cols,
            entries,
        })
    }

    /// Kernel with every entry equal to the constant matrix `m`.
    pub fn constant(a: f64, b: f64, m: &RealMatrix) -> Result<Self> {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| vec![vec![m[(i, j)]]])
            .collect();
        Self::new(a, b, m.nrows(), m.ncols(), entries)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coefficients(&self, i: usize, j: usize) -> &[Vec<f64>] {
        &self.entries[i * self.cols + j]
    }

    pub fn eval(&self, t: f64, s: f64) -> RealMatrix {
        RealMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.coefficients(i, j)
                .iter()
                .rev()
                .fold(0.0, |acc, row| acc * t + Poly::new(row.clone()).eval(s))
        })
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|grid| {
                    grid.iter()
                        .map(|row| row.iter().map(|c| c * lambda).collect())
                        .collect()
                })
                .collect(),
            ..self.clone()
        }
    }

    /// `k(t) = \int_a^b K(t, s) ds`, integrating each `s`-polynomial by
    /// Gauss–Legendre.
    pub fn collapse(&self, q: &QuadratureConfig) -> PiecewiseMatrixFunction {
        let piece = PolyMatrix::from_fn(self.rows, self.cols, |i, j| {
            Poly::new(
                self.coefficients(i, j)
                    .iter()
                    .map(|row| {
                        let p = Poly::new(row.clone());
                        q.panel(self.a, self.b).map(|(s, w)| w * p.eval(s)).sum()
                    })
                    .collect(),
            )
        });
        PiecewiseMatrixFunction::polynomial(self.a, self.b, piece).expect("kernel domain is valid")
    }
}
