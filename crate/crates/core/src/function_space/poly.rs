use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::RealMatrix;

/// Univariate polynomial in `t`, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// The identity polynomial `t`.
    pub fn t() -> Self {
        Self {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Length of the coefficient list minus one; `None` for the empty list.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Antiderivative with zero constant term.
    pub fn integral(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(self.coeffs.iter().enumerate().map(|(k, c)| c / (k as f64 + 1.0)));
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// `self(alpha * t + beta)` as a polynomial in `t`.
    pub fn compose_affine(&self, alpha: f64, beta: f64) -> Self {
        let inner = Poly::new(vec![beta, alpha]);
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, &c| &(&acc * &inner) + &Poly::constant(c))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// Dense `rows x cols` array of polynomials, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    /// Panics if `entries.len() != rows * cols`.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Poly>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows * cols");
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Poly) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::from_entries(rows, cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Poly::zero())
    }

    pub fn constant(m: &RealMatrix) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| Poly::constant(m[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn eval(&self, t: f64) -> RealMatrix {
        RealMatrix::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).eval(t))
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        Self::from_entries(self.rows, self.cols, self.entries.iter().map(f).collect())
    }

    pub fn max_degree(&self) -> usize {
        self.entries.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    pub(crate) fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.entry(j, i).clone())
    }

    /// `alpha * self + beta * other`; shapes must agree.
    pub(crate) fn lin_comb(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            &self.entry(i, j).scale(alpha) + &other.entry(i, j).scale(beta)
        })
    }

    pub(crate) fn matmul(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Poly::zero(), |acc, k| {
                &acc + &(self.entry(i, k) * other.entry(k, j))
            })
        })
    }

    pub(crate) fn mul_const_right(&self, m: &RealMatrix) -> Self {
        Self::from_fn(self.rows, m.ncols(), |i, j| {
            (0..self.cols).fold(Poly::zero(), |acc, k| {
                &acc + &self.entry(i, k).scale(m[(k, j)])
            })
        })
    }

    pub(crate) fn mul_const_left(&self, m: &RealMatrix) -> Self {
        Self::from_fn(m.nrows(), self.cols, |i, j| {
            (0..self.rows).fold(Poly::zero(), |acc, k| {
                &acc + &self.entry(k, j).scale(m[(i, k)])
            })
        })
    }

    pub(crate) fn hcat(parts: &[&Self]) -> Self {
        let rows = parts.first().map_or(0, |p| p.rows);
        let cols = parts.iter().map(|p| p.cols).sum();
        Self::from_fn(rows, cols, |i, mut j| {
            for p in parts {
                if j < p.cols {
                    return p.entry(i, j).clone();
                }
                j -= p.cols;
            }
            unreachable!()
        })
    }

    pub(crate) fn vcat(parts: &[&Self]) -> Self {
        let cols = parts.first().map_or(0, |p| p.cols);
        let rows = parts.iter().map(|p| p.rows).sum();
        Self::from_fn(rows, cols, |mut i, j| {
            for p in parts {
                if i < p.rows {
                    return p.entry(i, j).clone();
                }
                i -= p.rows;
            }
            unreachable!()
        })
    }

    pub(crate) fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.entry(i, cols[j]).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner() {
        let p = Poly::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(Poly::zero().eval(3.0), 0.0);
    }

    #[test]
    fn calculus() {
        let p = Poly::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.integral().coeffs(), &[0.0, 1.0, 1.0, 1.0]);
        assert_eq!(p.integral().derivative(), p);
    }

    #[test]
    fn arithmetic() {
        let t = Poly::t();
        assert_eq!((&t * &t).coeffs(), &[0.0, 0.0, 1.0]);
        assert_eq!((&t + &Poly::constant(1.0)).coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn affine_composition() {
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        let q = p.compose_affine(2.0, -1.0);
        for &t in &[-1.0, 0.0, 0.3, 2.0] {
            assert!((q.eval(t) - p.eval(2.0 * t - 1.0)).abs() < 1e-14);
        }
    }
}
