//! AC1–AC9, each at its stated tolerance and runtime budget. One line per
//! criterion; the test fails if any criterion does.

use std::time::{Duration, Instant};

use semilinear_lab::config::ExperimentConfig;
use semilinear_lab::data::{Case, DataFamily};
use semilinear_lab::report::envelope_json;
use semilinear_lab::system::{SystemParams, TimeSchedule};
use semilinear_lab::verify::{log_c_grid, run_dichotomy_scan, run_suite, run_verify, DichotomyScan, ScanOptions, Suite, SuiteReport};
use semilinear_lab::GridGeometry;

const SEED: u64 = 42;

struct Line {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Checks of `report` whose names start with one of `prefixes` (all when empty).
fn judge(id: &'static str, report: &SuiteReport, prefixes: &[&str], took: Duration, budget: Duration) -> Line {
    let picked: Vec<_> = report
        .checks
        .iter()
        .filter(|c| prefixes.is_empty() || prefixes.iter().any(|p| c.name.starts_with(p)))
        .collect();
    let failed: Vec<String> = picked
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({:.3e} > {:.1e}{})", c.name, c.value, c.threshold, c.note.as_deref().map(|n| format!("; {n}")).unwrap_or_default()))
        .collect();
    let in_time = took <= budget;
    let worst = picked
        .iter()
        .filter(|c| c.threshold.is_finite() && c.threshold > 0.0)
        .map(|c| c.value / c.threshold)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut detail = format!("{} checks, worst value/threshold {worst:.3}, {:.1}s of {}s", picked.len(), took.as_secs_f64(), budget.as_secs());
    if !failed.is_empty() {
        detail.push_str(&format!("; failed: {}", failed.join(", ")));
    }
    if !in_time {
        detail.push_str("; over budget");
    }
    Line { id, passed: !picked.is_empty() && failed.is_empty() && in_time, detail }
}

fn scan_ok(scan: &DichotomyScan) -> (bool, String) {
    let ok = scan.monotone && scan.bracket.is_some_and(|[lo, _]| lo > 0.0) && scan.small_data_regime.is_some();
    (
        ok,
        format!(
            "case {}: bracket {:?}, monotone {}, bounded up to c = {:?}, all converged rows bounded {}",
            scan.case, scan.bracket, scan.monotone, scan.small_data_regime, scan.converged_monitors_bounded
        ),
    )
}

fn dichotomy_line() -> Line {
    let ((a, c), took) = timed(|| {
        let cfg = ExperimentConfig::default_for_case(Case::A, 1.0);
        let g = cfg.geometry.build().unwrap();
        let grid = log_c_grid(0.01, 10.0, 13);
        let opts = ScanOptions::default();
        let a = run_dichotomy_scan(&cfg.data, &cfg.params, &g, &grid, &cfg.schedule, &opts).unwrap();
        let params = SystemParams::new(1, 3.0, 3.0, 1.0, 1.0).unwrap();
        let g = GridGeometry::new(1, 4.0, 512).unwrap();
        let sched = TimeSchedule::new(0.08, 32, 2.0).unwrap();
        let c = run_dichotomy_scan(&DataFamily::new(Case::C, 1.0, 1.0), &params, &g, &grid, &sched, &opts).unwrap();
        (a, c)
    });
    let (ok_a, da) = scan_ok(&a);
    let (ok_c, dc) = scan_ok(&c);
    let in_time = took <= Duration::from_secs(600);
    Line { id: "AC7", passed: ok_a && ok_c && in_time, detail: format!("{da}; {dc}; {:.1}s of 600s", took.as_secs_f64()) }
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let mut lines = Vec::new();

    let (rep, t) = timed(|| run_suite(Suite::Rearrangement, SEED));
    lines.push(judge("AC1", &rep, &[], t, secs(30)));

    let (rep, t) = timed(|| run_suite(Suite::Semigroup, SEED));
    lines.push(judge("AC2", &rep, &["kernel_rearrangement"], t, secs(60)));
    lines.push(judge("AC3", &rep, &["oracle_equivalence", "semigroup_identity"], t, secs(30)));

    let (rep, t) = timed(|| run_suite(Suite::Inequalities, SEED));
    lines.push(judge("AC4", &rep, &[], t, secs(120)));

    let (rep, t) = timed(|| run_suite(Suite::Decay, SEED));
    lines.push(judge("AC5", &rep, &[], t, secs(180)));

    let (rep, t) = timed(|| run_suite(Suite::Iteration, SEED));
    lines.push(judge("AC6", &rep, &[], t, secs(120)));

    lines.push(dichotomy_line());

    let (rep, t) = timed(|| run_suite(Suite::Supersolution, SEED));
    lines.push(judge("AC8", &rep, &[], t, secs(180)));

    let (first, t) = timed(|| envelope_json("verify", &run_verify(&Suite::ALL, SEED).unwrap()));
    let second = envelope_json("verify", &run_verify(&Suite::ALL, SEED).unwrap());
    lines.push(Line {
        id: "AC9",
        passed: first == second,
        detail: format!("{} bytes per report, identical {}, {:.1}s per run", first.len(), first == second, t.as_secs_f64()),
    });

    println!();
    for l in &lines {
        println!("[{}] {} {}", l.id, if l.passed { "PASS" } else { "FAIL" }, l.detail);
    }
    let failed: Vec<&str> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
