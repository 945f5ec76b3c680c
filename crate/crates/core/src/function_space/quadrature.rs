use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]` applied panel by panel.
///
/// A rule of order `G` integrates polynomials of degree `<= 2G - 1` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self::new(8).expect("order 8 is valid")
    }
}

impl QuadratureConfig {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("gauss_order must be at least 1".into()));
        }
        let (nodes, weights) = gauss_legendre(order);
        Ok(Self {
            order,
            nodes,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    pub fn panel(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

/// Legendre `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // the middle node is exactly zero
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_order() {
        assert!(QuadratureConfig::new(0).is_err());
    }

    #[test]
    fn weights_sum_to_two() {
        for g in 1..=20 {
            let q = QuadratureConfig::new(g).unwrap();
            let s: f64 = q.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "order {g}: {s}");
        }
    }

    #[test]
    fn two_point_rule() {
        let q = QuadratureConfig::new(2).unwrap();
        let x = 1.0 / 3.0_f64.sqrt();
        assert!((q.nodes()[0] + x).abs() < 1e-15);
        assert!((q.nodes()[1] - x).abs() < 1e-15);
    }

    #[test]
    fn monomial_exactness() {
        for g in 1..=12 {
            let q = QuadratureConfig::new(g).unwrap();
            for d in 0..2 * g {
                let approx: f64 = q.panel(0.0, 1.0).map(|(t, w)| w * t.powi(d as i32)).sum();
                let exact = 1.0 / (d as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-14, "G={g} d={d}");
            }
        }
    }
}
