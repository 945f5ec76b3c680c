use idereg_core::function_space::{PiecewiseMatrixFunction, Poly, PolyMatrix, QuadratureConfig, Side};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn poly_of_degree<R: Rng>(rng: &mut R, degree: usize) -> Poly {
    let mut c: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    if c[degree].abs() < 0.1 {
        c[degree] = 0.5;
    }
    Poly::new(c)
}

fn exact_integral(p: &Poly, lo: f64, hi: f64) -> f64 {
    let a = p.integral();
    a.eval(hi) - a.eval(lo)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_exactness(seed in any::<u64>(), g in prop::sample::select(vec![2usize, 4, 8])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = poly_of_degree(&mut rng, 2 * g - 1);
        let (lo, hi) = (rng.gen_range(-1.0..0.0), rng.gen_range(0.5..2.0));
        let q = QuadratureConfig::new(g).unwrap();
        let f = PiecewiseMatrixFunction::polynomial(lo, hi, PolyMatrix::from_entries(1, 1, vec![p.clone()])).unwrap();
        let approx = f.integrate(lo, hi, &q).unwrap()[(0, 0)];
        let exact = exact_integral(&p, lo, hi);
        let scale = exact.abs().max(p.coeffs().iter().map(|c| c.abs()).sum::<f64>() * (hi - lo));
        prop_assert!((approx - exact).abs() <= 1e-12 * scale);
    }

    #[test]
    fn antiderivative_matches_integral(seed in any::<u64>(), cut in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let left = PolyMatrix::from_fn(2, 1, |_, _| poly_of_degree(&mut rng, 3));
        let right = PolyMatrix::from_fn(2, 1, |_, _| poly_of_degree(&mut rng, 3));
        let f = PiecewiseMatrixFunction::new(0.0, 1.0, vec![cut], vec![left, right]).unwrap();
        let q = QuadratureConfig::default();
        let big = f.antiderivative();
        let at_b = big.eval_at(1.0, Side::Left).unwrap();
        prop_assert!((at_b - f.integrate_all(&q)).amax() < 1e-12);
        // continuous across the breakpoint
        let jump = big.eval_at(cut, Side::Right).unwrap() - big.eval_at(cut, Side::Left).unwrap();
        prop_assert!(jump.amax() < 1e-13);
        let t = rng.gen_range(0.0..1.0);
        let direct = f.integrate(0.0, t, &q).unwrap();
        prop_assert!((big.eval_at(t, Side::Right).unwrap() - direct).amax() < 1e-12);
    }

    #[test]
    fn integration_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PiecewiseMatrixFunction::new(0.0, 2.0, vec![0.7], vec![
            PolyMatrix::from_fn(1, 2, |_, _| poly_of_degree(&mut rng, 3)),
            PolyMatrix::from_fn(1, 2, |_, _| poly_of_degree(&mut rng, 3)),
        ]).unwrap();
        let g = PiecewiseMatrixFunction::new(0.0, 2.0, vec![1.3], vec![
            PolyMatrix::from_fn(1, 2, |_, _| poly_of_degree(&mut rng, 2)),
            PolyMatrix::from_fn(1, 2, |_, _| poly_of_degree(&mut rng, 2)),
        ]).unwrap();
        let q = QuadratureConfig::default();
        let lhs = PiecewiseMatrixFunction::combine(alpha, &f, beta, &g).unwrap().integrate_all(&q);
        let rhs = f.integrate_all(&q) * alpha + g.integrate_all(&q) * beta;
        prop_assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn product_evaluates_pointwise(seed in any::<u64>(), t in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PiecewiseMatrixFunction::polynomial(0.0, 1.0, PolyMatrix::from_fn(2, 3, |_, _| poly_of_degree(&mut rng, 3))).unwrap();
        let g = PiecewiseMatrixFunction::new(0.0, 1.0, vec![0.5], vec![
            PolyMatrix::from_fn(3, 2, |_, _| poly_of_degree(&mut rng, 2)),
            PolyMatrix::from_fn(3, 2, |_, _| poly_of_degree(&mut rng, 2)),
        ]).unwrap();
        let fg = PiecewiseMatrixFunction::matmul(&f, &g).unwrap();
        for side in [Side::Left, Side::Right] {
            let direct = f.eval_at(t, side).unwrap() * g.eval_at(t, side).unwrap();
            prop_assert!((fg.eval_at(t, side).unwrap() - direct).amax() < 1e-12);
        }
    }
}
