use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use stoint::coeffs::PhaseRule;
use stoint::verify::{self, CheckReport, Grid};
use stoint::EvalConfig;

struct Line {
    id: u32,
    report: CheckReport,
    limit: Option<Duration>,
}

impl Line {
    fn passed(&self) -> bool {
        self.report.passed && self.limit.map_or(true, |l| self.report.elapsed < l)
    }

    fn print(&self) {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let r = &self.report;
        let limit = match self.limit {
            Some(l) => format!(" limit={}s", l.as_secs()),
            None => String::new(),
        };
        println!(
            "criterion {:>2}: {verdict} {:<24} cases={:<6} worst={:.3e} tol={:.1e} time={:.2}s{limit} {}",
            self.id,
            r.name,
            r.cases,
            r.worst,
            r.tolerance,
            r.elapsed.as_secs_f64(),
            r.note
        );
    }
}

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_cases.jsonl")
}

fn run_golden(workers: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_stoint"))
        .arg("batch")
        .arg(golden())
        .args(["--workers", &workers.to_string()])
        .env_remove("STOINT_MU_TOL")
        .env_remove("STOINT_SERIES_TOL")
        .env_remove("STOINT_MU_CAP")
        .output()
        .expect("run stoint batch");
    assert!(out.status.success(), "batch failed: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn golden_determinism() -> CheckReport {
    let start = Instant::now();
    let runs = [1usize, 2, 4, 1];
    let outputs: Vec<Vec<u8>> = runs.iter().map(|&w| run_golden(w)).collect();
    let lines = outputs[0].split(|&b| b == b'\n').filter(|l| !l.is_empty()).count();
    let mismatched: Vec<String> = runs
        .iter()
        .zip(&outputs)
        .skip(1)
        .filter(|(_, o)| **o != outputs[0])
        .map(|(w, _)| format!("workers={w}"))
        .collect();
    CheckReport {
        name: "golden_batch_identical",
        passed: mismatched.is_empty() && lines == 100,
        cases: runs.len() * lines,
        worst: mismatched.len() as f64,
        tolerance: 0.0,
        note: if mismatched.is_empty() {
            format!("{lines} records, workers 1,2,4 and a repeat")
        } else {
            format!("differs: {}", mismatched.join(", "))
        },
        elapsed: start.elapsed(),
    }
}

fn main() {
    let cfg = EvalConfig::default();
    let g = Grid::Full;
    let secs = Duration::from_secs;
    let lines = vec![
        Line { id: 1, report: verify::check_b_cross_path(g), limit: Some(secs(10)) },
        Line { id: 2, report: verify::check_b_parity(g), limit: None },
        Line { id: 3, report: verify::check_a_quadrature(g), limit: Some(secs(300)) },
        Line { id: 4, report: verify::check_a_derivative(g), limit: None },
        Line { id: 5, report: verify::check_w_forms(g), limit: None },
        Line { id: 6, report: verify::check_oracle_1s(g, &cfg), limit: None },
        Line { id: 7, report: verify::check_symmetries(g, &cfg), limit: None },
        Line { id: 8, report: verify::check_scaling(g, &cfg), limit: None },
        Line { id: 9, report: verify::check_coefficients(g, PhaseRule::default()), limit: None },
        Line { id: 10, report: golden_determinism(), limit: None },
    ];
    for l in &lines {
        l.print();
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.passed()).map(|l| l.id).collect();
    println!("acceptance: {}/{} criteria passed", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
