//! Scans of the data amplitude `c = c1 = c2` bracketing the change from
//! convergent iteration to blow-up.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{make_data, Case, DataFamily};
use crate::error::{invalid, Result};
use crate::field::GridGeometry;
use crate::monitor::{monitor_bounded_quantities, Monitor};
use crate::system::{run_iteration, IterationOptions, SystemParams, TimeSchedule, Trajectory, Verdict};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanOptions {
    pub iteration: IterationOptions,
    /// Evaluate the case monitors on every iterate.
    pub monitor: bool,
    pub monitor_time_stride: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { iteration: IterationOptions::default(), monitor: true, monitor_time_stride: 2 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorSummary {
    pub names: Vec<String>,
    pub ratio: Vec<f64>,
    pub all_bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub c: f64,
    pub verdict: Verdict,
    pub iterations: usize,
    pub last_delta: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyScan {
    pub case: Case,
    pub rows: Vec<ScanRow>,
    /// `[largest converged c, smallest blown-up c]` when both exist.
    pub bracket: Option<[f64; 2]>,
    /// Verdict ranks `converged < inconclusive < blew_up` never decrease in `c`.
    pub monotone: bool,
    /// Monitors bounded on every converged row (vacuous without monitors).
    pub converged_monitors_bounded: bool,
    /// Largest `c > 0` such that every converged row with `c' ≤ c` has
    /// bounded monitors, provided the bounded rows form an initial segment
    /// of the converged ones.
    pub small_data_regime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

impl DichotomyScan {
    pub fn bracket_ratio(&self) -> Option<f64> {
        self.bracket.map(|[lo, hi]| hi / lo)
    }

    /// Rows `c, verdict, iterations, last_delta, sup_u, sup_v`.
    pub fn to_csv(&self) -> String {
        use crate::report::fmt_f64;
        let mut out = String::from("c,verdict,iterations,last_delta,sup_u,sup_v\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_f64(r.c),
                r.verdict,
                r.iterations,
                fmt_f64(r.last_delta),
                fmt_f64(r.sup_u),
                fmt_f64(r.sup_v)
            ));
        }
        out
    }
}

fn rank(v: Verdict) -> u8 {
    match v {
        Verdict::Converged => 0,
        Verdict::Inconclusive => 1,
        Verdict::BlewUp => 2,
    }
}

/// `n` log-spaced values from `lo` to `hi`.
pub fn log_c_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Runs the iteration for `c1 = c2 = c` over the grid.
pub fn run_dichotomy_scan(
    family: &DataFamily,
    params: &SystemParams,
    geometry: &GridGeometry,
    c_grid: &[f64],
    schedule: &TimeSchedule,
    options: &ScanOptions,
) -> Result<DichotomyScan> {
    let case = params.case().case;
    if family.case != case {
        return invalid(format!("data family is for case {} but the parameters are in case {case}", family.case));
    }
    if c_grid.is_empty() {
        return invalid("c-grid is empty");
    }
    if c_grid.iter().any(|c| !(*c >= 0.0 && c.is_finite())) || c_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("c-grid must be finite, non-negative and strictly increasing");
    }
    let monitor = if options.monitor {
        Some(
            Monitor::for_case(params, geometry, schedule.horizon, None)?
                .with_strides(if params.dim == 1 { 1 } else { 2 }, options.monitor_time_stride),
        )
    } else {
        None
    };
    let rows = c_grid
        .par_iter()
        .map(|&c| -> Result<ScanRow> {
            let data = make_data(&family.with_constants(c, c), params, geometry)?;
            let eval = monitor.as_ref().map(|m| move |u: &Trajectory, v: &Trajectory| m.evaluate(u, v));
            let trace = match &eval {
                Some(f) => run_iteration(&data.mu, &data.nu, params, schedule, &options.iteration, Some(f))?,
                None => run_iteration(&data.mu, &data.nu, params, schedule, &options.iteration, None)?,
            };
            let summary = match (&monitor, trace.verdict) {
                (Some(m), Verdict::Converged) => {
                    let rep = monitor_bounded_quantities(&trace, m)?;
                    Some(MonitorSummary { names: rep.names, ratio: rep.ratio, all_bounded: rep.all_bounded })
                }
                _ => None,
            };
            let last = trace.records.last().expect("at least the free evolution");
            Ok(ScanRow {
                c,
                verdict: trace.verdict,
                iterations: trace.iterations(),
                last_delta: last.delta,
                sup_u: last.sup_u,
                sup_v: last.sup_v,
                monitor: summary,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| rank(w[0].verdict) <= rank(w[1].verdict));
    let lo = rows.iter().filter(|r| r.verdict == Verdict::Converged).map(|r| r.c).fold(f64::NAN, f64::max);
    let hi = rows.iter().filter(|r| r.verdict == Verdict::BlewUp).map(|r| r.c).fold(f64::NAN, f64::min);
    let bracket = (lo.is_finite() && hi.is_finite() && lo < hi).then_some([lo, hi]);
    let converged_monitors_bounded = rows
        .iter()
        .filter(|r| r.verdict == Verdict::Converged)
        .all(|r| r.monitor.as_ref().map_or(true, |m| m.all_bounded));
    let converged: Vec<&ScanRow> = rows.iter().filter(|r| r.verdict == Verdict::Converged && r.c > 0.0).collect();
    let bounded_prefix = converged
        .iter()
        .take_while(|r| r.monitor.as_ref().is_some_and(|m| m.all_bounded))
        .count();
    let down_closed = converged[bounded_prefix..]
        .iter()
        .all(|r| !r.monitor.as_ref().is_some_and(|m| m.all_bounded));
    let small_data_regime = (bounded_prefix > 0 && down_closed).then(|| converged[bounded_prefix - 1].c);
    let flag = (!monotone).then(|| {
        "verdicts are not monotone in c; refine the grid or the time mesh".to_string()
    });
    Ok(DichotomyScan { case, rows, bracket, monotone, converged_monitors_bounded, small_data_regime, flag })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_converges() {
        let params = SystemParams::new(1, 3.0, 3.0, 1.0, 1.0).unwrap();
        let g = GridGeometry::new(1, 4.0, 128).unwrap();
        let sched = TimeSchedule::new(0.1, 8, 2.0).unwrap();
        let scan = run_dichotomy_scan(&DataFamily::new(Case::C, 0.0, 0.0), &params, &g, &[0.0], &sched, &ScanOptions::default()).unwrap();
        assert_eq!(scan.rows.len(), 1);
        assert_eq!(scan.rows[0].verdict, Verdict::Converged);
        assert!(scan.bracket.is_none());
        assert!(scan.monotone);
        let bad = run_dichotomy_scan(&DataFamily::new(Case::A, 0.0, 0.0), &params, &g, &[0.0], &sched, &ScanOptions::default());
        assert!(bad.is_err());
    }
}
