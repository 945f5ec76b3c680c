use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use idereg_core::control::{
    build_moments, build_system, check_regularizability, control_family, regularize_with, ControlPolicy,
};
use idereg_core::function_space::{QuadratureConfig, Side};
use idereg_core::generating::{check_solvability, solve_family, AlgebraicCore, SolutionFamily, SolvabilityReport};
use idereg_core::linalg::{RealVector, ToleranceConfig};
use idereg_core::oracle::{classify, family_distance, oracle_solve, OracleConfig, Verdict};
use idereg_core::{Error, JumpModel, ProblemSpec, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::document::{self, JumpModelDoc, Objective, ProblemDocument};
use crate::output::{to_csv, to_json, SampleRow};
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSOLVABLE: i32 = 3;
pub const EXIT_NOT_REGULARIZABLE: i32 = 4;
pub const EXIT_DISAGREEMENT: i32 = 5;

/// Largest oracle-to-family distance still counted as agreement.
pub const FAMILY_DISTANCE_TOL: f64 = 1e-4;

const DEFAULT_SAMPLES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Flags shared by all subcommands. Each one overrides its counterpart in
/// the document's `options` block.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Relative singular value cutoff for rank decisions
    #[arg(long = "tol-rank", value_name = "R")]
    pub tol_rank: Option<f64>,
    /// Threshold on solvability and regularizability residuals
    #[arg(long = "tol-solve", value_name = "S")]
    pub tol_solve: Option<f64>,
    /// Gauss-Legendre points per polynomial piece
    #[arg(long = "quad-order", value_name = "G")]
    pub quad_order: Option<usize>,
    #[arg(long = "jump-model", value_enum)]
    pub jump_model: Option<JumpArg>,
    /// Number of uniform sample points for `solve`
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    /// Family parameters c, comma separated
    #[arg(long, value_name = "c1,..", value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// JSON file holding the weight matrix for `--objective weighted`
    #[arg(long, value_name = "W.json")]
    pub weight: Option<PathBuf>,
    /// JSON file holding the reference control for `--objective weighted`
    #[arg(long, value_name = "u.json")]
    pub uref: Option<PathBuf>,
    /// Oracle nodes per impulse subinterval
    #[arg(long = "oracle-nodes", value_name = "M")]
    pub oracle_nodes: Option<usize>,
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JumpArg {
    Free,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Minnorm,
    Weighted,
}

/// Result of a subcommand: what goes to stdout, and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
    /// Diagnostic for stderr, if any.
    pub note: Option<String>,
}

struct Setup {
    problem: ProblemSpec,
    cfg: SolverConfig,
    doc: ProblemDocument,
    flags: Flags,
}

impl Setup {
    fn load(path: &Path, flags: &Flags) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let doc = document::parse(&text)?;
        let opts = &doc.options;
        let rank_tol = flags.tol_rank.or(opts.rank_tol_rel).unwrap_or(ToleranceConfig::default().rank_tol_rel);
        let solve_tol = flags.tol_solve.or(opts.solve_tol).unwrap_or(ToleranceConfig::default().solve_tol);
        if !(rank_tol > 0.0 && rank_tol < 1.0) {
            return Err(CliError::input(format!("rank tolerance must lie in (0, 1), got {rank_tol}")));
        }
        // solve_tol >= 1 is accepted on purpose; it loosens the verdicts
        if !(solve_tol > 0.0 && solve_tol.is_finite()) {
            return Err(CliError::input(format!("solve tolerance must be positive, got {solve_tol}")));
        }
        let order = flags.quad_order.or(opts.gauss_order).unwrap_or(QuadratureConfig::default().order());
        let quad = QuadratureConfig::new(order).map_err(|e| CliError::input(e.to_string()))?;
        let cfg = SolverConfig {
            tol: ToleranceConfig::unchecked(rank_tol, solve_tol),
            quad,
        };
        let jump = flags.jump_model.map(|j| match j {
            JumpArg::Free => JumpModel::Free,
            JumpArg::None => JumpModel::None,
        });
        let problem = doc.to_problem(jump, &cfg.tol)?;
        Ok(Self {
            problem,
            cfg,
            doc,
            flags: flags.clone(),
        })
    }

    fn output(&self, default: OutputFormat) -> OutputFormat {
        self.flags.output.unwrap_or(default)
    }

    fn json_only(&self, cmd: &str) -> Result<(), CliError> {
        if self.output(OutputFormat::Json) == OutputFormat::Csv {
            return Err(CliError::input(format!("--output csv is only available for solve, not {cmd}")));
        }
        Ok(())
    }

    fn oracle_config(&self) -> Result<OracleConfig, CliError> {
        let nodes = self
            .flags
            .oracle_nodes
            .or(self.doc.options.oracle_nodes)
            .unwrap_or(OracleConfig::default().nodes_per_subinterval);
        OracleConfig::default()
            .with_nodes(nodes)
            .map_err(|e| CliError::input(e.to_string()))
    }

    fn policy(&self) -> Result<(Objective, ControlPolicy), CliError> {
        let objective = match self.flags.objective {
            Some(ObjectiveArg::Minnorm) => Objective::Minnorm,
            Some(ObjectiveArg::Weighted) => Objective::Weighted,
            None => self.doc.options.objective.unwrap_or(Objective::Minnorm),
        };
        if objective == Objective::Minnorm {
            return Ok((objective, ControlPolicy::MinNorm));
        }
        let n = self.problem.n;
        let weight = match &self.flags.weight {
            Some(path) => read_json::<Vec<Vec<f64>>>(path)?,
            None => self
                .doc
                .options
                .weight
                .clone()
                .unwrap_or_else(|| (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()),
        };
        let weight = document::matrix("weight", &weight, Some(n))?;
        let reference = match &self.flags.uref {
            Some(path) => read_json::<Vec<f64>>(path)?,
            None => self.doc.options.uref.clone().unwrap_or_else(|| vec![0.0; n]),
        };
        Ok((
            objective,
            ControlPolicy::Weighted {
                weight,
                reference: RealVector::from_column_slice(&reference),
            },
        ))
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Maps library errors onto the exit-code contract.
fn core_error(e: Error) -> CliError {
    match e {
        Error::InvalidInput(_)
        | Error::DimensionMismatch(_)
        | Error::OutsideDomain { .. }
        | Error::ReversedBounds { .. }
        | Error::InvalidImpulse { .. }
        | Error::InvalidWeight(_)
        | Error::NoControlKernel => CliError::input(e.to_string()),
        Error::Unsolvable(_) => CliError::new(EXIT_UNSOLVABLE, e.to_string()),
        Error::NotRegularizable { .. } => CliError::new(EXIT_NOT_REGULARIZABLE, e.to_string()),
        Error::InconsistentRank { .. } => CliError::new(1, e.to_string()),
    }
}

fn vec_of(v: &RealVector) -> Vec<f64> {
    v.iter().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RanksOut {
    pub n_param: usize,
    #[serde(rename = "rank_D")]
    pub rank_d: usize,
    pub r1: usize,
    pub d1: usize,
    #[serde(rename = "rank_Q")]
    pub rank_q: usize,
    pub r2: usize,
    pub d2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualsOut {
    pub cond1: f64,
    pub cond2: f64,
}

impl From<&SolvabilityReport> for ResidualsOut {
    fn from(r: &SolvabilityReport) -> Self {
        Self {
            cond1: r.cond1_residual,
            cond2: r.cond2_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsOut {
    pub jump_model: JumpModelDoc,
    pub gauss_order: usize,
    pub rank_tol_rel: f64,
    pub solve_tol: f64,
}

impl From<&Setup> for SettingsOut {
    fn from(s: &Setup) -> Self {
        Self {
            jump_model: match s.problem.jump_model {
                JumpModel::Free => JumpModelDoc::Free,
                JumpModel::None => JumpModelDoc::None,
            },
            gauss_order: s.cfg.quad.order(),
            rank_tol_rel: s.cfg.tol.rank_tol_rel,
            solve_tol: s.cfg.tol.solve_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub settings: SettingsOut,
    pub ranks: RanksOut,
    pub residuals: ResidualsOut,
    pub solvable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularizable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_min_norm: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_dim: Option<usize>,
}

pub fn analyze(path: &Path, flags: &Flags) -> Result<Outcome, CliError> {
    let s = Setup::load(path, flags)?;
    s.json_only("analyze")?;
    let delta = s.problem.delta();
    let core = AlgebraicCore::build(&s.problem, &s.cfg).map_err(core_error)?;
    let rep = check_solvability(&core, &delta).map_err(core_error)?;
    let r = core.ranks;
    let mut report = AnalysisReport {
        settings: SettingsOut::from(&s),
        ranks: RanksOut {
            n_param: r.n_param,
            rank_d: r.rank_d,
            r1: r.r1,
            d1: r.d1,
            rank_q: r.rank_q,
            r2: r.r2,
            d2: r.d2,
        },
        residuals: ResidualsOut::from(&rep),
        solvable: rep.solvable,
        criterion_residual: None,
        regularizable: None,
        u_min_norm: None,
        control_dim: None,
    };
    let mut code = if rep.solvable { EXIT_OK } else { EXIT_UNSOLVABLE };
    if s.problem.control_kernel.is_some() {
        let moments = build_moments(&s.problem, &core).map_err(core_error)?;
        let sys = build_system(&core, &moments, &delta).map_err(core_error)?;
        let check = check_regularizability(&sys, &s.cfg.tol);
        report.criterion_residual = Some(check.residual);
        report.regularizable = Some(check.regularizable);
        if check.regularizable {
            let fam = control_family(&sys, &s.cfg.tol).map_err(core_error)?;
            report.u_min_norm = Some(vec_of(&fam.u0));
            report.control_dim = Some(fam.dim);
        } else if !rep.solvable {
            code = EXIT_NOT_REGULARIZABLE;
        }
    }
    Ok(Outcome {
        stdout: to_json(&report),
        code,
        note: None,
    })
}

/// Uniform samples on `[a, b]` plus every impulse instant, which is listed
/// twice (left and right limit).
pub fn sample_rows(x: &idereg_core::function_space::PiecewiseMatrixFunction, p: &ProblemSpec, count: usize) -> Result<Vec<SampleRow>, CliError> {
    if count < 2 {
        return Err(CliError::input(format!("--samples must be at least 2, got {count}")));
    }
    let (a, b) = (p.a, p.b);
    let mut ts: Vec<f64> = (0..count)
        .map(|k| if k + 1 == count { b } else { a + (b - a) * k as f64 / (count - 1) as f64 })
        .collect();
    let taus = p.impulse_instants();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (b - a);
    for &tau in &taus {
        match ts.iter_mut().find(|t| close(**t, tau)) {
            Some(t) => *t = tau,
            None => ts.push(tau),
        }
    }
    ts.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(ts.len() + taus.len());
    let value = |t: f64, side: Side| -> Result<Vec<f64>, CliError> {
        Ok(x.eval_at(t, side).map_err(core_error)?.iter().copied().collect())
    };
    for t in ts {
        if taus.contains(&t) {
            rows.push(SampleRow { t, side: "left".into(), x: value(t, Side::Left)? });
            rows.push(SampleRow { t, side: "right".into(), x: value(t, Side::Right)? });
        } else {
            rows.push(SampleRow { t, side: "both".into(), x: value(t, Side::Right)? });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub r2: usize,
    pub params: Vec<f64>,
    pub rows: Vec<SampleRow>,
}

pub fn solve(path: &Path, flags: &Flags) -> Result<Outcome, CliError> {
    let s = Setup::load(path, flags)?;
    let delta = s.problem.delta();
    let core = AlgebraicCore::build(&s.problem, &s.cfg).map_err(core_error)?;
    let rep = check_solvability(&core, &delta).map_err(core_error)?;
    if !rep.solvable {
        return Ok(Outcome {
            stdout: String::new(),
            code: EXIT_UNSOLVABLE,
            note: Some(format!(
                "problem is not solvable (cond1 = {:e}, cond2 = {:e}); try `idereg regularize`",
                rep.cond1_residual, rep.cond2_residual
            )),
        });
    }
    let fam = solve_family(&core, &delta).map_err(core_error)?;
    let params = s
        .flags
        .params
        .clone()
        .or_else(|| s.doc.options.params.clone())
        .unwrap_or_else(|| vec![0.0; fam.r2]);
    if params.len() != fam.r2 {
        return Err(CliError::input(format!(
            "the solution family has {} parameters, got {}",
            fam.r2,
            params.len()
        )));
    }
    let x = fam.member(&params).map_err(core_error)?;
    let samples = s.flags.samples.or(s.doc.options.samples).unwrap_or(DEFAULT_SAMPLES);
    let rows = sample_rows(&x, &s.problem, samples)?;
    let stdout = match s.output(OutputFormat::Csv) {
        OutputFormat::Csv => to_csv(&rows, s.problem.n),
        OutputFormat::Json => to_json(&SolveReport { r2: fam.r2, params, rows }),
    };
    Ok(Outcome {
        stdout,
        code: EXIT_OK,
        note: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyOut {
    pub r2: usize,
    pub residuals: ResidualsOut,
    pub solvable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizeReport {
    pub settings: SettingsOut,
    pub objective: Objective,
    pub d1: usize,
    pub d2: usize,
    pub criterion_residual: f64,
    pub regularizable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_min_norm: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_dim: Option<usize>,
    /// The problem after the control is applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyOut>,
}

pub fn regularize(path: &Path, flags: &Flags) -> Result<Outcome, CliError> {
    let s = Setup::load(path, flags)?;
    s.json_only("regularize")?;
    if s.problem.control_kernel.is_none() {
        return Err(CliError::input("regularize needs a control kernel \"K\" in the document"));
    }
    let (objective, policy) = s.policy()?;
    let delta = s.problem.delta();
    let core = AlgebraicCore::build(&s.problem, &s.cfg).map_err(core_error)?;
    let sys = build_system(&core, &build_moments(&s.problem, &core).map_err(core_error)?, &delta)
        .map_err(core_error)?;
    let check = check_regularizability(&sys, &s.cfg.tol);
    let mut report = RegularizeReport {
        settings: SettingsOut::from(&s),
        objective,
        d1: sys.d1,
        d2: sys.d2,
        criterion_residual: check.residual,
        regularizable: check.regularizable,
        u: None,
        u_min_norm: None,
        control_dim: None,
        family: None,
    };
    if !check.regularizable {
        return Ok(Outcome {
            stdout: to_json(&report),
            code: EXIT_NOT_REGULARIZABLE,
            note: Some(format!("P_U* g != 0 (criterion residual {:e})", check.residual)),
        });
    }
    let out = regularize_with(&s.problem, &delta, &s.cfg, &policy).map_err(core_error)?;
    report.u = Some(vec_of(&out.u));
    report.u_min_norm = Some(vec_of(&out.control.u0));
    report.control_dim = Some(out.control.dim);
    report.family = Some(FamilyOut {
        r2: out.family.r2,
        residuals: ResidualsOut::from(&out.report),
        solvable: out.report.solvable,
    });
    Ok(Outcome {
        stdout: to_json(&report),
        code: EXIT_OK,
        note: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOut {
    pub solvable: bool,
    pub residuals: ResidualsOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOut {
    pub verdict: String,
    pub min_residual: f64,
    pub nodes_per_subinterval: usize,
    pub residual_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizedCheck {
    pub u: Vec<f64>,
    pub oracle: OracleOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_distance: Option<f64>,
    pub agree: bool,
    pub indeterminate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub settings: SettingsOut,
    pub solver: SolverOut,
    pub oracle: OracleOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_distance: Option<f64>,
    pub agree: bool,
    pub indeterminate: bool,
    /// Oracle check of the min-norm control, when the problem is regularizable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularized: Option<RegularizedCheck>,
}

/// Compares a solver verdict (and family, if solvable) with an oracle run.
fn compare(
    solvable: bool,
    family: Option<&SolutionFamily>,
    sol: &idereg_core::oracle::OracleSolution,
    oc: &OracleConfig,
) -> Result<(OracleOut, Option<f64>, bool, bool), CliError> {
    let verdict = classify(sol.min_residual, oc);
    let out = OracleOut {
        verdict: verdict.as_str().into(),
        min_residual: sol.min_residual,
        nodes_per_subinterval: oc.nodes_per_subinterval,
        residual_tol: oc.residual_tol,
    };
    let indeterminate = verdict == Verdict::Indeterminate;
    let mut distance = None;
    let mut agree = match verdict {
        Verdict::Indeterminate => true,
        Verdict::Solvable => solvable,
        Verdict::Unsolvable => !solvable,
    };
    if let (Verdict::Solvable, Some(fam)) = (verdict, family) {
        let d = family_distance(fam, &sol.grid).map_err(core_error)?;
        agree &= d < FAMILY_DISTANCE_TOL;
        distance = Some(d);
    }
    Ok((out, distance, agree, indeterminate))
}

pub fn verify(path: &Path, flags: &Flags) -> Result<Outcome, CliError> {
    let s = Setup::load(path, flags)?;
    s.json_only("verify")?;
    let oc = s.oracle_config()?;
    let p = &s.problem;
    let delta = p.delta();

    let (solver, oracle) = std::thread::scope(|scope| {
        let oracle = scope.spawn(|| oracle_solve(p, &delta, None, &oc));
        let solver = (|| {
            let core = AlgebraicCore::build(p, &s.cfg)?;
            let rep = check_solvability(&core, &delta)?;
            let fam = if rep.solvable { Some(solve_family(&core, &delta)?) } else { None };
            Ok::<_, Error>((core, rep, fam))
        })();
        (solver, oracle.join().expect("oracle thread"))
    });
    let (core, rep, fam) = solver.map_err(core_error)?;
    let sol = oracle.map_err(core_error)?;
    let (oracle_out, distance, agree, indeterminate) = compare(rep.solvable, fam.as_ref(), &sol, &oc)?;

    let mut regularized = None;
    if !rep.solvable && p.control_kernel.is_some() {
        let sys = build_system(&core, &build_moments(p, &core).map_err(core_error)?, &delta).map_err(core_error)?;
        if check_regularizability(&sys, &s.cfg.tol).regularizable {
            let out = regularize_with(p, &delta, &s.cfg, &ControlPolicy::MinNorm).map_err(core_error)?;
            let sol = oracle_solve(p, &delta, Some(&out.u), &oc).map_err(core_error)?;
            let (o, d, a, i) = compare(out.report.solvable, Some(&out.family), &sol, &oc)?;
            regularized = Some(RegularizedCheck {
                u: vec_of(&out.u),
                oracle: o,
                family_distance: d,
                agree: a,
                indeterminate: i,
            });
        }
    }
    let all_agree = agree && regularized.as_ref().is_none_or(|r| r.agree);
    let report = VerifyReport {
        settings: SettingsOut::from(&s),
        solver: SolverOut {
            solvable: rep.solvable,
            residuals: ResidualsOut::from(&rep),
        },
        oracle: oracle_out,
        family_distance: distance,
        agree,
        indeterminate,
        regularized,
    };
    Ok(Outcome {
        stdout: to_json(&report),
        code: if all_agree { EXIT_OK } else { EXIT_DISAGREEMENT },
        note: (!all_agree).then(|| "solver and oracle disagree".to_string()),
    })
}


#[cfg(test)]
mod tests {
    use super::*;

    fn example(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
    }

    #[test]
    fn reports_round_trip() {
        for name in ["s1.json", "s1_solvable.json", "s1_zero_kernel.json", "stimulus.json"] {
            let out = analyze(&example(name), &Flags::default()).unwrap();
            let back: AnalysisReport = serde_json::from_str(&out.stdout).unwrap();
            assert_eq!(to_json(&back), out.stdout, "{name}");

            let out = regularize(&example(name), &Flags::default()).unwrap();
            let back: RegularizeReport = serde_json::from_str(&out.stdout).unwrap();
            assert_eq!(to_json(&back), out.stdout, "{name}");
        }
        let out = verify(&example("stimulus.json"), &Flags::default()).unwrap();
        let back: VerifyReport = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(to_json(&back), out.stdout);
    }

    #[test]
    fn analyze_exit_codes() {
        let code = |name| analyze(&example(name), &Flags::default()).unwrap().code;
        assert_eq!(code("s1.json"), EXIT_UNSOLVABLE);
        assert_eq!(code("s1_solvable.json"), EXIT_OK);
        assert_eq!(code("s1_zero_kernel.json"), EXIT_NOT_REGULARIZABLE);
    }
}
