mod common;

use idereg_core::control::{
    apply_control, build_moments, build_system, check_regularizability, control_family, select_min_norm,
    system_from_parts,
};
use idereg_core::function_space::PiecewiseMatrixFunction;
use idereg_core::generating::{check_solvability, residual_norms, solve_family, AlgebraicCore};
use idereg_core::instances::{generate, generate_mixed, InstanceOptions, Structure};
use idereg_core::linalg::{least_squares_min_norm, numerical_rank, numerical_rank_with_scale, RealMatrix, RealVector, ToleranceConfig};
use idereg_core::{JumpModel, SolverConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn rand_vec<R: Rng>(rng: &mut R, len: usize) -> RealVector {
    RealVector::from_fn(len, |_, _| rng.gen_range(-1.0..=1.0))
}

#[test]
fn dimension_identities_both_jump_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for jump_model in [JumpModel::Free, JumpModel::None] {
        let opts = InstanceOptions { jump_model, ..Default::default() };
        for i in 0..30 {
            let inst = generate_mixed(&mut rng, &opts, i).unwrap();
            let p = &inst.problem;
            let core = AlgebraicCore::build(p, &cfg()).unwrap();
            let r = core.ranks;
            let n_param = match jump_model {
                JumpModel::Free => p.m + p.n + p.n * p.impulses.len(),
                JumpModel::None => p.m + p.n,
            };
            assert_eq!(r.n_param, n_param);
            assert_eq!(core.d.shape(), (p.m, n_param));
            // generated data is O(1); cancellation noise in D and Q must not count
            let rank_d = numerical_rank_with_scale(&core.d, 1.0, &cfg().tol).unwrap();
            let rank_q = numerical_rank_with_scale(&core.q, 1.0, &cfg().tol).unwrap();
            assert_eq!(r.rank_d, rank_d);
            assert_eq!(r.rank_q, rank_q);
            assert_eq!(r.r1, n_param - rank_d);
            assert_eq!(r.d1, p.m - rank_d);
            assert_eq!(r.r2, r.r1 - rank_q);
            assert_eq!(r.d2, p.impulse_rows() + p.q() - rank_q);
        }
    }
}

#[test]
fn jump_free_model_without_impulses_has_literal_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = InstanceOptions { max_impulses: 0, jump_model: JumpModel::None, ..Default::default() };
    for _ in 0..10 {
        let inst = generate(&mut rng, &opts, Structure::Generic, false).unwrap();
        let p = &inst.problem;
        let core = AlgebraicCore::build(p, &cfg()).unwrap();
        assert_eq!(core.d.shape(), (p.m, p.m + p.n));
        assert_eq!(core.psi0.shape(), (p.n, p.m + p.n));
    }
}

#[test]
fn family_members_solve_the_problem() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    for i in 0..24 {
        let inst = generate_mixed(&mut rng, &InstanceOptions::default(), i).unwrap();
        let p = &inst.problem;
        let core = AlgebraicCore::build(p, &cfg()).unwrap();
        let delta = inst.delta();
        if !check_solvability(&core, &delta).unwrap().solvable {
            continue;
        }
        checked += 1;
        let fam = solve_family(&core, &delta).unwrap();
        for _ in 0..10 {
            let c: Vec<f64> = (0..fam.r2).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let x = fam.member(&c).unwrap();
            let res = residual_norms(p, &x, &delta, &cfg()).unwrap();
            assert!(res.ide_residual < 1e-8, "instance {i}: {res:?}");
            assert!(res.cond_residual < 1e-8, "instance {i}: {res:?}");
        }
        // basis columns are independent functions
        let gram = PiecewiseMatrixFunction::matmul(&fam.basis.transpose(), &fam.basis)
            .unwrap()
            .integrate_all(&cfg().quad);
        assert_eq!(numerical_rank(&gram, &cfg().tol).unwrap(), fam.r2);
    }
    assert!(checked >= 10);
}

/// Unsolvable instances with a control kernel whose criterion holds.
fn regularizable_instances(seed: u64, count: usize) -> Vec<idereg_core::instances::Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = InstanceOptions { control: true, ..Default::default() };
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < count {
        i += 1;
        let inst = generate(&mut rng, &opts, Structure::DegenerateMoments, true).unwrap();
        let core = AlgebraicCore::build(&inst.problem, &cfg()).unwrap();
        if check_solvability(&core, &inst.delta()).unwrap().solvable {
            continue;
        }
        let mom = build_moments(&inst.problem, &core).unwrap();
        let sys = build_system(&core, &mom, &inst.delta()).unwrap();
        if check_regularizability(&sys, &cfg().tol).regularizable {
            out.push(inst);
        }
        assert!(i < 50 * count, "too few regularizable instances");
    }
    out
}

#[test]
fn regularized_family_is_solvable() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for inst in regularizable_instances(22, 8) {
        let p = &inst.problem;
        let delta = inst.delta();
        let core = AlgebraicCore::build(p, &cfg()).unwrap();
        let sys = build_system(&core, &build_moments(p, &core).unwrap(), &delta).unwrap();
        let fam = control_family(&sys, &cfg().tol).unwrap();
        // U u0 = g
        assert!((&sys.u * &fam.u0 - &sys.g).amax() < 1e-9);
        for k in 0..10 {
            let u = if k == 0 { fam.u0.clone() } else { fam.member(&rand_vec(&mut rng, p.n)).unwrap() };
            let repaired = apply_control(p, &u, &cfg().quad).unwrap();
            let rep = check_solvability(&AlgebraicCore::build(&repaired, &cfg()).unwrap(), &delta).unwrap();
            assert!(rep.cond1_residual < 1e-8 && rep.cond2_residual < 1e-8, "{rep:?}");
        }
        let best = select_min_norm(&fam).norm();
        for _ in 0..100 {
            let other = fam.member(&(rand_vec(&mut rng, p.n) * 10.0)).unwrap();
            assert!(best <= other.norm() + 1e-12);
        }
    }
}

#[test]
fn kernel_scaling() {
    for inst in regularizable_instances(23, 4) {
        let p = &inst.problem;
        let delta = inst.delta();
        let core = AlgebraicCore::build(p, &cfg()).unwrap();
        let base = build_system(&core, &build_moments(p, &core).unwrap(), &delta).unwrap();
        let mut scaled = p.clone();
        let lambda = -2.5;
        scaled.control_kernel = Some(p.control_kernel.as_ref().unwrap().scale(lambda));
        let sys = build_system(&core, &build_moments(&scaled, &core).unwrap(), &delta).unwrap();
        assert!((&sys.u - &base.u * lambda).amax() < 1e-12 * base.u.amax().max(1.0));
        assert!((&sys.g - &base.g).amax() < 1e-15);
        let u0 = control_family(&base, &cfg().tol).unwrap().u0;
        let u1 = control_family(&sys, &cfg().tol).unwrap().u0;
        assert!((u1 - u0 / lambda).amax() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn criterion_matches_least_squares(seed in any::<u64>(), rows in 0usize..=5, cols in 1usize..=4, profile in 0usize..3, consistent in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, _) = common::profiled_matrix(&mut rng, rows, cols, profile);
        let g = if consistent { &u * rand_vec(&mut rng, cols) } else { rand_vec(&mut rng, rows) };
        let tol = ToleranceConfig::default();
        let sys = system_from_parts(u.clone(), g.clone(), rows, 0, &tol).unwrap();
        let check = check_regularizability(&sys, &tol);
        let ls = least_squares_min_norm(&u, &g, &tol).unwrap();
        let best = (&u * ls - &g).norm();
        prop_assert_eq!(check.regularizable, best < tol.solve_tol);
        if sys.criterion_residual > 10.0 * tol.solve_tol {
            let bound = sys.criterion_residual / (rows as f64).sqrt();
            for _ in 0..10 {
                let v = rand_vec(&mut rng, cols) * 5.0;
                prop_assert!((&u * v - &g).norm() >= bound - 1e-12);
            }
        }
    }
}

#[test]
fn empty_u_system() {
    let tol = ToleranceConfig::default();
    let sys = system_from_parts(RealMatrix::zeros(0, 3), RealVector::zeros(0), 0, 0, &tol).unwrap();
    let fam = control_family(&sys, &tol).unwrap();
    assert_eq!(fam.dim, 3);
}
