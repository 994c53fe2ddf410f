//! Runs the verification suites named on the command line (default: all).

use semilinear_lab::verify::{run_verify, Suite};

fn main() -> semilinear_lab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let suites: Vec<Suite> = if args.is_empty() { Suite::ALL.to_vec() } else { args.iter().map(|a| a.parse()).collect::<Result<_, _>>()? };
    let report = run_verify(&suites, 42)?;
    for s in &report.suites {
        println!("{} {}", if s.passed { "PASS" } else { "FAIL" }, s.suite);
        for c in &s.checks {
            println!("  {:<36} {:<5} {:.3e} (≤ {:.1e})", c.name, c.passed, c.value, c.threshold);
        }
    }
    Ok(())
}
