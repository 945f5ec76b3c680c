//! Linear vector functionals on piecewise functions.
//!
//! A functional is a finite sum of one-sided point evaluations plus an
//! integral against a piecewise polynomial weight. The boundary condition,
//! each impulse interface condition, and their stack are all of this form.

use crate::error::{Error, Result};
use crate::function_space::{PiecewiseMatrixFunction, QuadratureConfig, Side};
use crate::linalg::{numerical_rank, RealMatrix, RealVector, ToleranceConfig};

/// `M x(t, side)`. An absent side is only allowed where `x` is continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTerm {
    pub t: f64,
    pub side: Option<Side>,
    pub matrix: RealMatrix,
}

impl PointTerm {
    pub fn new(t: f64, side: Option<Side>, matrix: RealMatrix) -> Self {
        Self { t, side, matrix }
    }

    pub fn sided(t: f64, side: Side, matrix: RealMatrix) -> Self {
        Self::new(t, Some(side), matrix)
    }

    pub fn effective_side(&self) -> Side {
        self.side.unwrap_or(Side::Right)
    }
}

/// `x -> sum_j M_j x(t_j, side_j) + \int_a^b W(t) x(t) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearVectorFunctional {
    out_dim: usize,
    width: usize,
    points: Vec<PointTerm>,
    integral: Option<PiecewiseMatrixFunction>,
}

impl LinearVectorFunctional {
    pub fn new(
        out_dim: usize,
        width: usize,
        points: Vec<PointTerm>,
        integral: Option<PiecewiseMatrixFunction>,
    ) -> Result<Self> {
        for p in &points {
            if p.matrix.shape() != (out_dim, width) {
                return Err(Error::DimensionMismatch(format!(
                    "point term at t = {} has shape {:?}, expected {:?}",
                    p.t,
                    p.matrix.shape(),
                    (out_dim, width)
                )));
            }
            if !p.t.is_finite() || p.matrix.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite point term".into()));
            }
        }
        if let Some(w) = &integral {
            if w.shape() != (out_dim, width) {
                return Err(Error::DimensionMismatch(format!(
                    "integral weight has shape {:?}, expected {:?}",
                    w.shape(),
                    (out_dim, width)
                )));
            }
        }
        Ok(Self {
            out_dim,
            width,
            points,
            integral,
        })
    }

    pub fn zero(out_dim: usize, width: usize) -> Self {
        Self {
            out_dim,
            width,
            points: Vec::new(),
            integral: None,
        }
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn points(&self) -> &[PointTerm] {
        &self.points
    }

    pub fn integral(&self) -> Option<&PiecewiseMatrixFunction> {
        self.integral.as_ref()
    }

    /// Columnwise application to an `n x w` function; returns `out_dim x w`.
    pub fn apply(&self, x: &PiecewiseMatrixFunction, q: &QuadratureConfig) -> Result<RealMatrix> {
        if x.rows() != self.width {
            return Err(Error::DimensionMismatch(format!(
                "functional acts on {}-vectors, function has {} rows",
                self.width,
                x.rows()
            )));
        }
        let mut out = RealMatrix::zeros(self.out_dim, x.cols());
        for p in &self.points {
            out += &p.matrix * x.eval_at(p.t, p.effective_side())?;
        }
        if let Some(w) = &self.integral {
            out += PiecewiseMatrixFunction::matmul(w, x)?.integrate_all(q);
        }
        Ok(out)
    }

    pub fn apply_vector(&self, x: &PiecewiseMatrixFunction, q: &QuadratureConfig) -> Result<RealVector> {
        let m = self.apply(x, q)?;
        if m.ncols() != 1 {
            return Err(Error::DimensionMismatch("expected a single column".into()));
        }
        Ok(m.column(0).into_owned())
    }
}

/// Row concatenation of functionals acting on the same vector width.
pub fn stack(parts: &[LinearVectorFunctional], width: usize) -> Result<LinearVectorFunctional> {
    if let Some(p) = parts.iter().find(|p| p.width != width) {
        return Err(Error::DimensionMismatch(format!(
            "cannot stack a functional of width {} into width {width}",
            p.width
        )));
    }
    let out_dim: usize = parts.iter().map(|p| p.out_dim).sum();
    let mut points = Vec::new();
    let mut weights: Vec<PiecewiseMatrixFunction> = Vec::new();
    let mut offset = 0;
    let mut domain = None;
    for p in parts {
        for term in &p.points {
            let mut m = RealMatrix::zeros(out_dim, width);
            m.view_mut((offset, 0), (p.out_dim, width)).copy_from(&term.matrix);
            points.push(PointTerm::new(term.t, term.side, m));
        }
        if let Some(w) = &p.integral {
            domain = Some(w.domain());
        }
        offset += p.out_dim;
    }
    let integral = match domain {
        None => None,
        Some((a, b)) => {
            for p in parts {
                let block = match &p.integral {
                    Some(w) => w.clone(),
                    None => PiecewiseMatrixFunction::zeros(a, b, p.out_dim, width)?,
                };
                weights.push(block);
            }
            let refs: Vec<&PiecewiseMatrixFunction> = weights.iter().collect();
            Some(PiecewiseMatrixFunction::vcat(&refs)?)
        }
    };
    LinearVectorFunctional::new(out_dim, width, points, integral)
}

/// Impulsive action `E (x(tau+) - x(tau-)) = S x(tau-) + gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseRecord {
    tau: f64,
    e: RealMatrix,
    s: RealMatrix,
    gamma: RealVector,
}

impl ImpulseRecord {
    /// Validates shapes and `rank(E + S) = k < n`, where `k` is the row count.
    pub fn new(
        tau: f64,
        e: RealMatrix,
        s: RealMatrix,
        gamma: RealVector,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidImpulse { tau, reason };
        if !tau.is_finite() {
            return Err(invalid("non-finite instant".into()));
        }
        if e.shape() != s.shape() {
            return Err(invalid(format!(
                "E has shape {:?} but S has shape {:?}",
                e.shape(),
                s.shape()
            )));
        }
        let (k, n) = e.shape();
        if gamma.len() != k {
            return Err(invalid(format!("gamma has length {}, expected {k}", gamma.len())));
        }
        if k >= n {
            return Err(invalid(format!("k = {k} must be smaller than n = {n}")));
        }
        if gamma.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite gamma".into()));
        }
        let rank = numerical_rank(&(&e + &s), tol)?;
        if rank != k {
            return Err(invalid(format!("rank(E + S) = {rank}, expected k = {k}")));
        }
        Ok(Self { tau, e, s, gamma })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn e(&self) -> &RealMatrix {
        &self.e
    }

    pub fn s(&self) -> &RealMatrix {
        &self.s
    }

    pub fn gamma(&self) -> &RealVector {
        &self.gamma
    }

    pub fn k(&self) -> usize {
        self.e.nrows()
    }

    pub fn n(&self) -> usize {
        self.e.ncols()
    }
}

/// `phi x = E x(tau+) - (E + S) x(tau-)`.
pub fn impulse_functional(imp: &ImpulseRecord) -> LinearVectorFunctional {
    LinearVectorFunctional {
        out_dim: imp.k(),
        width: imp.n(),
        points: vec![
            PointTerm::sided(imp.tau, Side::Right, imp.e.clone()),
            PointTerm::sided(imp.tau, Side::Left, -(&imp.e + &imp.s)),
        ],
        integral: None,
    }
}

/// `delta = (gamma_1, ..., gamma_p, alpha)`, in the stacking order of the
/// combined functional.
pub fn build_delta(imps: &[ImpulseRecord], alpha: &RealVector) -> RealVector {
    let values: Vec<f64> = imps
        .iter()
        .flat_map(|i| i.gamma.iter().copied())
        .chain(alpha.iter().copied())
        .collect();
    RealVector::from_vec(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{Poly, PolyMatrix};

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn row(v: &[f64]) -> RealMatrix {
        RealMatrix::from_row_slice(1, v.len(), v)
    }

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    /// (t, 1) before 0.5 and (t + 1, 1) after.
    fn x_jump() -> PiecewiseMatrixFunction {
        let before = PolyMatrix::from_entries(2, 1, vec![Poly::t(), Poly::constant(1.0)]);
        let after = PolyMatrix::from_entries(2, 1, vec![Poly::new(vec![1.0, 1.0]), Poly::constant(1.0)]);
        PiecewiseMatrixFunction::new(0.0, 1.0, vec![0.5], vec![before, after]).unwrap()
    }

    fn x_cont() -> PiecewiseMatrixFunction {
        let p = PolyMatrix::from_entries(2, 1, vec![Poly::t(), Poly::constant(1.0)]);
        PiecewiseMatrixFunction::polynomial(0.0, 1.0, p).unwrap()
    }

    fn jump_impulse() -> ImpulseRecord {
        ImpulseRecord::new(0.5, row(&[1.0, 0.0]), row(&[0.0, 0.0]), RealVector::zeros(1), &tol()).unwrap()
    }

    #[test]
    fn impulse_on_jump_and_continuous() {
        let phi = impulse_functional(&jump_impulse());
        assert!((phi.apply(&x_jump(), &q()).unwrap()[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(phi.apply(&x_cont(), &q()).unwrap()[(0, 0)].abs() < 1e-15);
        let both = PiecewiseMatrixFunction::hcat(&[&x_jump(), &x_cont()]).unwrap();
        let v = phi.apply(&both, &q()).unwrap();
        assert!((v - row(&[1.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn impulse_rank_validation() {
        let err = ImpulseRecord::new(0.5, row(&[1.0, 0.0]), row(&[-1.0, 0.0]), RealVector::zeros(1), &tol());
        assert!(matches!(err, Err(Error::InvalidImpulse { .. })));
        // k must be < n
        let err = ImpulseRecord::new(0.5, row(&[1.0]), row(&[0.0]), RealVector::zeros(1), &tol());
        assert!(err.is_err());
        let err = ImpulseRecord::new(0.5, row(&[1.0, 0.0]), row(&[0.0, 0.0]), RealVector::zeros(2), &tol());
        assert!(err.is_err());
    }

    #[test]
    fn point_and_integral_application() {
        let ell = LinearVectorFunctional::new(1, 1, vec![PointTerm::new(0.0, None, row(&[1.0]))], None).unwrap();
        let x = PiecewiseMatrixFunction::polynomial(
            0.0,
            1.0,
            PolyMatrix::from_entries(1, 2, vec![Poly::t(), Poly::constant(1.0)]),
        )
        .unwrap();
        assert_eq!(ell.apply(&x, &q()).unwrap(), row(&[0.0, 1.0]));

        let mean = LinearVectorFunctional::new(
            1,
            1,
            vec![],
            Some(PiecewiseMatrixFunction::identity(0.0, 1.0, 1).unwrap()),
        )
        .unwrap();
        let t = PiecewiseMatrixFunction::polynomial(0.0, 1.0, PolyMatrix::from_entries(1, 1, vec![Poly::t()])).unwrap();
        assert!((mean.apply(&t, &q()).unwrap()[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn width_mismatch() {
        let ell = LinearVectorFunctional::zero(1, 3);
        assert!(matches!(ell.apply(&x_cont(), &q()), Err(Error::DimensionMismatch(_))));
        assert!(stack(&[ell], 2).is_err());
    }

    #[test]
    fn stacking() {
        let a = LinearVectorFunctional::new(1, 1, vec![PointTerm::new(0.0, None, row(&[1.0]))], None).unwrap();
        let b = LinearVectorFunctional::new(
            2,
            1,
            vec![PointTerm::new(1.0, None, RealMatrix::from_row_slice(2, 1, &[1.0, 2.0]))],
            Some(PiecewiseMatrixFunction::constant(0.0, 1.0, &RealMatrix::from_row_slice(2, 1, &[0.0, 1.0])).unwrap()),
        )
        .unwrap();
        let s = stack(&[a.clone(), b.clone()], 1).unwrap();
        assert_eq!(s.out_dim(), 3);
        let x = PiecewiseMatrixFunction::polynomial(0.0, 1.0, PolyMatrix::from_entries(1, 1, vec![Poly::new(vec![1.0, 1.0])])).unwrap();
        let whole = s.apply(&x, &q()).unwrap();
        let pa = a.apply(&x, &q()).unwrap();
        let pb = b.apply(&x, &q()).unwrap();
        assert!((whole.rows(0, 1) - pa).amax() < 1e-15);
        assert!((whole.rows(1, 2) - pb).amax() < 1e-15);
        assert_eq!(stack(&[], 2).unwrap().out_dim(), 0);
    }

    #[test]
    fn delta_order() {
        assert_eq!(build_delta(&[], &RealVector::from_vec(vec![0.0])).as_slice(), &[0.0]);
        let imp = ImpulseRecord::new(0.5, row(&[1.0, 0.0]), row(&[0.0, 0.0]), RealVector::from_vec(vec![1.0]), &tol()).unwrap();
        let d = build_delta(&[imp], &RealVector::from_vec(vec![2.0, 3.0]));
        assert_eq!(d.as_slice(), &[1.0, 2.0, 3.0]);
    }
}
