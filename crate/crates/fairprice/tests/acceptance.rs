//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use fairprice::validate::{self, CRITERIA};

/// The thresholds the criteria are defined with. A change to any of the
/// suite's constants fails here first.
fn pinned() -> Vec<(&'static str, f64, f64)> {
    vec![
        ("golden", validate::GOLDEN_TOL, 1e-12),
        ("oracle revenue", validate::ORACLE_REVENUE_TOL, 1e-4),
        ("oracle policy", validate::ORACLE_POLICY_TOL, 1e-3),
        ("surface", validate::SURFACE_TOL, 1e-9),
        ("surface samples", validate::SURFACE_SAMPLES as f64, 50.0),
        ("brute-force step", validate::BRUTE_FORCE_STEP, 1e-3),
        ("brute-force tol", validate::BRUTE_FORCE_TOL, 2e-3),
        ("brute-force markets", validate::BRUTE_FORCE_MARKETS as f64, 20.0),
        ("lp tol", validate::LP_TOL, 1e-8),
        ("lp cases", validate::LP_CASES as f64, 500.0),
        ("fairness runs", validate::FAIRNESS_RUNS as f64, 40.0),
        ("slope max", validate::SLOPE_MAX, 0.75),
        ("slope seeds", validate::SLOPE_SEEDS as f64, 10.0),
        ("retention runs", validate::RETENTION_RUNS as f64, 20.0),
        ("retention min", validate::RETENTION_MIN as f64, 19.0),
        ("retention horizon", validate::RETENTION_HORIZON as f64, 1e5),
        ("metric tol", validate::METRIC_TOL, 1e-12),
        ("metric cases", validate::METRIC_CASES as f64, 200.0),
    ]
}

fn main() -> ExitCode {
    let mut ok = true;
    for (name, actual, expected) in pinned() {
        if actual != expected {
            println!("[FAIL] pinned threshold {name}: {actual} != {expected}");
            ok = false;
        }
    }
    if validate::ORACLE_EPS != [0.0, 1e-4, 1e-3, 1e-2] || validate::SLOPE_HORIZONS != [10_000, 100_000, 1_000_000] {
        println!("[FAIL] pinned grids changed");
        ok = false;
    }
    let start = Instant::now();
    let mut failed = Vec::new();
    for (id, _, check) in CRITERIA {
        let t = Instant::now();
        let c = check();
        println!("{c} ({:.1}s)", t.elapsed().as_secs_f64());
        if !c.passed {
            failed.push(id);
        }
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.0}s",
        CRITERIA.len() - failed.len(),
        CRITERIA.len(),
        start.elapsed().as_secs_f64()
    );
    if ok && failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
