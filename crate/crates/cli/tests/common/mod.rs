//! Helpers shared by the CLI and acceptance tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_idereg")
}

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn example(name: &str) -> String {
    root().join("examples").join(name).to_string_lossy().into_owned()
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub struct Case {
    pub golden: &'static str,
    pub args: &'static [&'static str],
    pub file: &'static str,
    pub exit: i32,
}

pub const CASES: &[Case] = &[
    Case { golden: "s1_analyze.json", args: &["analyze"], file: "s1.json", exit: 3 },
    Case { golden: "s1_solve.csv", args: &["solve"], file: "s1.json", exit: 3 },
    Case { golden: "s1_regularize.json", args: &["regularize"], file: "s1.json", exit: 0 },
    Case { golden: "s1_verify.json", args: &["verify"], file: "s1.json", exit: 0 },
    Case { golden: "s1_solvable_analyze.json", args: &["analyze"], file: "s1_solvable.json", exit: 0 },
    Case {
        golden: "s1_solvable_solve.csv",
        args: &["solve", "--params", "2", "--samples", "3"],
        file: "s1_solvable.json",
        exit: 0,
    },
    Case { golden: "s1_solvable_verify.json", args: &["verify"], file: "s1_solvable.json", exit: 0 },
    Case { golden: "s1_zero_kernel_analyze.json", args: &["analyze"], file: "s1_zero_kernel.json", exit: 4 },
    Case { golden: "s1_zero_kernel_regularize.json", args: &["regularize"], file: "s1_zero_kernel.json", exit: 4 },
    Case { golden: "s1_sabotaged_verify.json", args: &["verify", "--tol-solve", "10.0"], file: "s1.json", exit: 5 },
    Case { golden: "stimulus_analyze.json", args: &["analyze"], file: "stimulus.json", exit: 3 },
    Case { golden: "stimulus_solve.csv", args: &["solve"], file: "stimulus.json", exit: 3 },
    Case { golden: "stimulus_regularize.json", args: &["regularize"], file: "stimulus.json", exit: 0 },
    Case {
        golden: "stimulus_regularize_minnorm.json",
        args: &["regularize", "--objective", "minnorm"],
        file: "stimulus.json",
        exit: 0,
    },
    Case { golden: "stimulus_verify.json", args: &["verify"], file: "stimulus.json", exit: 0 },
    Case {
        golden: "stimulus_baseline_solve.csv",
        args: &["solve", "--samples", "9"],
        file: "stimulus_baseline.json",
        exit: 0,
    },
    Case {
        golden: "stimulus_baseline_solve.json",
        args: &["solve", "--samples", "3", "--output", "json"],
        file: "stimulus_baseline.json",
        exit: 0,
    },
    Case { golden: "stimulus_baseline_verify.json", args: &["verify"], file: "stimulus_baseline.json", exit: 0 },
];

pub fn case_args(c: &Case) -> Vec<String> {
    let mut args: Vec<String> = vec![c.args[0].to_string(), example(c.file)];
    args.extend(c.args[1..].iter().map(|s| s.to_string()));
    args
}

pub fn golden_path(name: &str) -> PathBuf {
    root().join("tests").join("golden").join(name)
}

/// Runs every golden case; returns the list of mismatches. With `bless`,
/// rewrites the golden files first.
pub fn check_golden(bless: bool) -> Vec<String> {
    let mut failures = Vec::new();
    for c in CASES {
        let args = case_args(c);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run(&args);
        let stdout = String::from_utf8(out.stdout.clone()).unwrap();
        let path = golden_path(c.golden);
        if bless {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &stdout).unwrap();
        }
        match std::fs::read_to_string(&path) {
            Ok(expected) if expected == stdout => {}
            Ok(_) => failures.push(format!("{}: output differs from golden file", c.golden)),
            Err(_) => failures.push(format!("{}: golden file missing", c.golden)),
        }
        if code(&out) != c.exit {
            failures.push(format!(
                "{}: exit {} (expected {}), stderr: {}",
                c.golden,
                code(&out),
                c.exit,
                String::from_utf8_lossy(&out.stderr)
            ));
        }
    }
    failures
}
