use idereg_core::control::regularize;
use idereg_core::generating::{check_solvability, solve_family, AlgebraicCore};
use idereg_core::instances::{generate, generate_mixed, InstanceOptions, Structure};
use idereg_core::oracle::{classify, family_distance, oracle_solve, OracleConfig, Verdict};
use idereg_core::{samples, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn verdicts_agree_with_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let oc = OracleConfig::default();
    for i in 0..12 {
        let inst = generate_mixed(&mut rng, &InstanceOptions::default(), i).unwrap();
        let p = &inst.problem;
        let delta = inst.delta();
        let core = AlgebraicCore::build(p, &cfg()).unwrap();
        let solvable = check_solvability(&core, &delta).unwrap().solvable;
        let sol = oracle_solve(p, &delta, None, &oc).unwrap();
        let verdict = classify(sol.min_residual, &oc);
        let expected = if solvable { Verdict::Solvable } else { Verdict::Unsolvable };
        assert_eq!(verdict, expected, "instance {i} ({:?}): residual {:e}", inst.structure, sol.min_residual);
        if solvable {
            let fam = solve_family(&core, &delta).unwrap();
            let dist = family_distance(&fam, &sol.grid).unwrap();
            assert!(dist < 10.0 * oc.residual_tol, "instance {i}: distance {dist:e}");
        }
    }
}

#[test]
fn residual_settles_under_refinement() {
    // degree 8 data is beyond what the stencils reproduce exactly
    let opts = InstanceOptions { degree: 8, max_impulses: 1, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let floor = 1e-9;
    for _ in 0..3 {
        let inst = generate(&mut rng, &opts, Structure::Generic, false).unwrap();
        let p = &inst.problem;
        let delta = inst.delta();
        let res: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&m| {
                let oc = OracleConfig::default().with_nodes(m).unwrap();
                oracle_solve(p, &delta, None, &oc).unwrap().min_residual
            })
            .collect();
        assert!(res[2] < 1e-6, "{res:?}");
        assert!(res[1] <= res[0].max(floor) && res[2] <= res[1].max(floor), "{res:?}");
    }
}

#[test]
fn unsolvable_residual_is_stable_under_refinement() {
    let p = samples::s1_problem(1.0);
    let delta = p.delta();
    let res: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&m| oracle_solve(&p, &delta, None, &OracleConfig::default().with_nodes(m).unwrap()).unwrap().min_residual)
        .collect();
    for r in &res {
        assert!((r - 1.0).abs() < 0.02, "{res:?}");
    }
}

#[test]
fn regularized_problem_passes_oracle() {
    let p = samples::s1_problem(1.0);
    let delta = p.delta();
    let out = regularize(&p, &delta, &cfg()).unwrap();
    let oc = OracleConfig::default();
    let sol = oracle_solve(&p, &delta, Some(&out.u), &oc).unwrap();
    assert_eq!(classify(sol.min_residual, &oc), Verdict::Solvable, "{:e}", sol.min_residual);
    assert!(family_distance(&out.family, &sol.grid).unwrap() < 1e-6);
}

#[test]
fn classify_bands() {
    let oc = OracleConfig::default();
    assert_eq!(classify(1e-7, &oc), Verdict::Solvable);
    assert_eq!(classify(3e-6, &oc), Verdict::Indeterminate);
    assert_eq!(classify(1e-4, &oc), Verdict::Unsolvable);
    assert!(OracleConfig::new(4, 1e-6, 10.0).is_err());
}
