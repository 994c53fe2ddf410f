//! Monotone Picard iteration for small case-A data, with monitors.

use semilinear_lab::config::ExperimentConfig;
use semilinear_lab::data::{make_data, Case};
use semilinear_lab::monitor::{monitor_bounded_quantities, Monitor};
use semilinear_lab::system::{run_iteration, Trajectory};

fn main() -> semilinear_lab::Result<()> {
    let cfg = ExperimentConfig::default_for_case(Case::A, 0.05);
    let g = cfg.geometry.build()?;
    let data = make_data(&cfg.data, &cfg.params, &g)?;
    let monitor = Monitor::for_case(&cfg.params, &g, cfg.schedule.horizon, None)?.with_strides(2, 2);
    let eval = |u: &Trajectory, v: &Trajectory| monitor.evaluate(u, v);
    let trace = run_iteration(&data.mu, &data.nu, &cfg.params, &cfg.schedule, &cfg.run.iteration(), Some(&eval))?;
    for r in &trace.records {
        println!("n={:<3} delta {:.3e}  sup u {:.5}  sup v {:.5}  drop {:.1e}", r.n, r.delta, r.sup_u, r.sup_v, r.max_drop);
    }
    println!("verdict: {}", trace.verdict);
    let rep = monitor_bounded_quantities(&trace, &monitor)?;
    for (name, ratio) in rep.names.iter().zip(&rep.ratio) {
        println!("  {name}: max_n / n=0 = {ratio:.4}");
    }
    Ok(())
}
