//! Random problem generator for property tests and oracle cross-checks.
//!
//! Data entries are polynomials with coefficients uniform in `[-1, 1]`.
//! Solvable instances are manufactured: pick a piecewise polynomial `x*`
//! with free jumps, then set `f = x*' - Phi \int (A x* + B x*')` and
//! `delta = L x*`. A perturbed instance adds noise to `f` and `delta`
//! afterwards, which breaks solvability whenever the chosen structure has a
//! cokernel.

use rand::Rng;

use crate::error::Result;
use crate::function_space::{BivariateKernel, PiecewiseMatrixFunction, Poly, PolyMatrix, QuadratureConfig};
use crate::functionals::{impulse_functional, ImpulseRecord, LinearVectorFunctional, PointTerm};
use crate::function_space::Side;
use crate::linalg::{pseudoinverse, RealMatrix, RealVector, ToleranceConfig};
use crate::problem::{JumpModel, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// Independent random data; typically `d1 = d2 = 0`.
    Generic,
    /// The last boundary row is a combination of the first ones, so `d2 >= 1`.
    RepeatedRow,
    /// `A = 0` and `B` tuned so that `I - \int B Phi` loses one rank, so `d1 >= 1`.
    DegenerateMoments,
}

impl Structure {
    pub const ALL: [Structure; 3] = [Structure::Generic, Structure::RepeatedRow, Structure::DegenerateMoments];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceOptions {
    pub max_m: usize,
    pub max_n: usize,
    pub max_impulses: usize,
    pub max_q: usize,
    pub degree: usize,
    pub control: bool,
    pub jump_model: JumpModel,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        Self {
            max_m: 3,
            max_n: 3,
            max_impulses: 2,
            max_q: 3,
            degree: 3,
            control: false,
            jump_model: JumpModel::Free,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: ProblemSpec,
    pub structure: Structure,
    pub perturbed: bool,
}

impl Instance {
    pub fn delta(&self) -> RealVector {
        self.problem.delta()
    }
}

fn coef<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-1.0..=1.0)
}

fn rand_poly<R: Rng>(rng: &mut R, degree: usize) -> Poly {
    Poly::new((0..=degree).map(|_| coef(rng)).collect())
}

fn rand_poly_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, degree: usize) -> PolyMatrix {
    PolyMatrix::from_fn(rows, cols, |_, _| rand_poly(rng, degree))
}

fn rand_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> RealMatrix {
    RealMatrix::from_fn(rows, cols, |_, _| coef(rng))
}

fn rand_vector<R: Rng>(rng: &mut R, len: usize) -> RealVector {
    RealVector::from_fn(len, |_, _| coef(rng))
}

fn rand_function<R: Rng>(rng: &mut R, a: f64, b: f64, rows: usize, cols: usize, degree: usize) -> PiecewiseMatrixFunction {
    PiecewiseMatrixFunction::polynomial(a, b, rand_poly_matrix(rng, rows, cols, degree)).expect("valid domain")
}

/// Random kernel with degree `degree` in both `t` and `s`.
pub fn random_kernel<R: Rng>(rng: &mut R, a: f64, b: f64, n: usize, degree: usize) -> BivariateKernel {
    let entries = (0..n * n)
        .map(|_| (0..=degree).map(|_| (0..=degree).map(|_| coef(rng)).collect()).collect())
        .collect();
    BivariateKernel::new(a, b, n, n, entries).expect("shapes agree")
}

/// Sorted instants in `(a, b)` at least `(b - a) / 8` apart and from the ends.
fn instants<R: Rng>(rng: &mut R, a: f64, b: f64, count: usize) -> Vec<f64> {
    let gap = (b - a) / 8.0;
    loop {
        let mut ts: Vec<f64> = (0..count).map(|_| rng.gen_range(a + gap..b - gap)).collect();
        ts.sort_by(|x, y| x.total_cmp(y));
        if ts.windows(2).all(|w| w[1] - w[0] >= gap) {
            return ts;
        }
    }
}

/// Draws `(E, S)` with `rank(E + S) = k`.
fn impulse_matrices<R: Rng>(rng: &mut R, k: usize, n: usize, tol: &ToleranceConfig) -> (RealMatrix, RealMatrix) {
    loop {
        let e = rand_matrix(rng, k, n);
        let s = rand_matrix(rng, k, n);
        if ImpulseRecord::new(0.0, e.clone(), s.clone(), RealVector::zeros(k), tol).is_ok() {
            return (e, s);
        }
    }
}

/// Boundary functional with point terms at both ends, sometimes an interior
/// one-sided point and sometimes an integral weight.
#[allow(clippy::too_many_arguments)]
fn boundary<R: Rng>(
    rng: &mut R,
    a: f64,
    b: f64,
    q: usize,
    n: usize,
    degree: usize,
    taus: &[f64],
    repeat: bool,
) -> LinearVectorFunctional {
    // the last row is lambda * row 0 + mu * row 1 when `repeat` is set
    let (lambda, mu) = (coef(rng), if q > 2 { coef(rng) } else { 0.0 });
    let fix = |m: RealMatrix| -> RealMatrix {
        let mut m = m;
        if repeat {
            let row = m.row(0) * lambda + if q > 2 { m.row(1) * mu } else { m.row(0) * 0.0 };
            m.row_mut(q - 1).copy_from(&row);
        }
        m
    };
    let mut points = vec![
        PointTerm::sided(a, Side::Right, fix(rand_matrix(rng, q, n))),
        PointTerm::sided(b, Side::Left, fix(rand_matrix(rng, q, n))),
    ];
    if !taus.is_empty() && rng.gen_bool(0.5) {
        let t = taus[rng.gen_range(0..taus.len())];
        let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
        points.push(PointTerm::sided(t, side, fix(rand_matrix(rng, q, n))));
    }
    let integral = rng.gen_bool(0.5).then(|| {
        let w = rand_poly_matrix(rng, q, n, degree);
        let w = if repeat {
            PolyMatrix::from_fn(q, n, |i, j| {
                if i + 1 == q {
                    let mut p = w.entry(0, j).scale(lambda);
                    if q > 2 {
                        p = &p + &w.entry(1, j).scale(mu);
                    }
                    p
                } else {
                    w.entry(i, j).clone()
                }
            })
        } else {
            w
        };
        PiecewiseMatrixFunction::polynomial(a, b, w).expect("valid domain")
    });
    LinearVectorFunctional::new(q, n, points, integral).expect("shapes agree")
}

/// One random instance of the requested structure.
pub fn generate<R: Rng>(rng: &mut R, opts: &InstanceOptions, structure: Structure, perturb: bool) -> Result<Instance> {
    let tol = ToleranceConfig::default();
    let quad = QuadratureConfig::default();
    let deg = opts.degree;
    let a = rng.gen_range(-0.5..0.5);
    let b = a + rng.gen_range(0.5..1.5);

    let n = rng.gen_range(1..=opts.max_n);
    let m = match structure {
        Structure::DegenerateMoments => rng.gen_range(1..=opts.max_m.min(n)),
        _ => rng.gen_range(1..=opts.max_m),
    };
    let p = if n >= 2 { rng.gen_range(0..=opts.max_impulses) } else { 0 };
    let q = match structure {
        Structure::RepeatedRow => rng.gen_range(2..=opts.max_q.max(2)),
        _ => rng.gen_range(1..=opts.max_q),
    };
    let taus = instants(rng, a, b, p);

    let profile = rand_function(rng, a, b, n, m, deg);
    let (state_moment, rate_moment) = match structure {
        Structure::DegenerateMoments => {
            // B = B0 + C with (I - \int B Phi) = R of rank m - 1
            let b0 = rand_function(rng, a, b, m, n, deg);
            let m0 = PiecewiseMatrixFunction::matmul(&b0, &profile)?.integrate_all(&quad);
            let psi_b = profile.integrate_all(&quad);
            let r = if m == 1 {
                RealMatrix::zeros(1, 1)
            } else {
                rand_matrix(rng, m, m - 1) * rand_matrix(rng, m - 1, m)
            };
            let c = (RealMatrix::identity(m, m) - m0 - r) * pseudoinverse(&psi_b, &tol)?;
            let shifted = b0.add(&PiecewiseMatrixFunction::constant(a, b, &c)?)?;
            (PiecewiseMatrixFunction::zeros(a, b, m, n)?, shifted)
        }
        _ => (rand_function(rng, a, b, m, n, deg), rand_function(rng, a, b, m, n, deg)),
    };

    let mut pairs = Vec::with_capacity(p);
    for &tau in &taus {
        let k = rng.gen_range(1..n);
        let (e, s) = impulse_matrices(rng, k, n, &tol);
        pairs.push((tau, e, s));
    }
    let ell = boundary(rng, a, b, q, n, deg, &taus, structure == Structure::RepeatedRow);

    // manufactured x* = P(t) + sum_i H_i(t) h_i
    let smooth = rand_poly_matrix(rng, n, 1, deg);
    let mut xstar = PiecewiseMatrixFunction::polynomial(a, b, smooth.clone())?;
    if opts.jump_model == JumpModel::Free {
        for &tau in &taus {
            let h = rand_vector(rng, n);
            let step = PiecewiseMatrixFunction::step(a, b, tau, n)?.mul_right(&RealMatrix::from_column_slice(n, 1, h.as_slice()))?;
            xstar = xstar.add(&step)?;
        }
    }
    let dx = PiecewiseMatrixFunction::polynomial(a, b, smooth.map(Poly::derivative))?;
    let c1 = PiecewiseMatrixFunction::matmul(&state_moment, &xstar)?
        .add(&PiecewiseMatrixFunction::matmul(&rate_moment, &dx)?)?
        .integrate_all(&quad);
    let mut forcing = dx.sub(&profile.mul_right(&c1)?)?;

    let mut impulses = Vec::with_capacity(p);
    for (tau, e, s) in pairs {
        let probe = ImpulseRecord::new(tau, e.clone(), s.clone(), RealVector::zeros(e.nrows()), &tol)?;
        let mut gamma = impulse_functional(&probe).apply_vector(&xstar, &quad)?;
        if perturb {
            gamma += rand_vector(rng, gamma.len()) * 0.5;
        }
        impulses.push(ImpulseRecord::new(tau, e, s, gamma, &tol)?);
    }
    let mut alpha = ell.apply_vector(&xstar, &quad)?;
    if perturb {
        alpha += rand_vector(rng, q) * 0.5;
        let bump = rand_vector(rng, n) * 0.5;
        forcing = forcing.add(&PiecewiseMatrixFunction::constant(
            a,
            b,
            &RealMatrix::from_column_slice(n, 1, bump.as_slice()),
        )?)?;
    }

    let control_kernel = opts.control.then(|| random_kernel(rng, a, b, n, deg));
    let problem = ProblemSpec {
        a,
        b,
        m,
        n,
        state_moment,
        rate_moment,
        profile,
        forcing,
        impulses,
        boundary: ell,
        alpha,
        control_kernel,
        jump_model: opts.jump_model,
    };
    problem.validate()?;
    Ok(Instance {
        problem,
        structure,
        perturbed: perturb,
    })
}

/// Cycles through structures, alternating clean and perturbed data.
pub fn generate_mixed<R: Rng>(rng: &mut R, opts: &InstanceOptions, index: usize) -> Result<Instance> {
    let structure = Structure::ALL[index % Structure::ALL.len()];
    generate(rng, opts, structure, (index / Structure::ALL.len()) % 2 == 1)
}
