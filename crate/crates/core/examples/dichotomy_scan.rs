//! Amplitude scan for case C (N = 1, p = q = 3).

use semilinear_lab::data::{Case, DataFamily};
use semilinear_lab::system::{SystemParams, TimeSchedule};
use semilinear_lab::verify::{log_c_grid, run_dichotomy_scan, ScanOptions};
use semilinear_lab::GridGeometry;

fn main() -> semilinear_lab::Result<()> {
    let params = SystemParams::new(1, 3.0, 3.0, 1.0, 1.0)?;
    let g = GridGeometry::new(1, 4.0, 256)?;
    let sched = TimeSchedule::new(0.08, 32, 2.0)?;
    let scan = run_dichotomy_scan(&DataFamily::new(Case::C, 1.0, 1.0), &params, &g, &log_c_grid(0.01, 10.0, 13), &sched, &ScanOptions::default())?;
    print!("{}", scan.to_csv());
    println!("bracket {:?}, monotone {}, small-data regime up to {:?}", scan.bracket, scan.monotone, scan.small_data_regime);
    Ok(())
}
