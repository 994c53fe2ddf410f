//! Case-A and case-F supersolution margins.

use semilinear_lab::config::ExperimentConfig;
use semilinear_lab::data::{make_data, Case};
use semilinear_lab::supersolution::check_supersolution;

fn main() -> semilinear_lab::Result<()> {
    for (case, c) in [(Case::A, 0.01), (Case::F, 0.05)] {
        let mut cfg = ExperimentConfig::default_for_case(case, c);
        cfg.geometry.cells = 64;
        let g = cfg.geometry.build()?;
        let data = make_data(&cfg.data, &cfg.params, &g)?;
        let rep = check_supersolution(&data.mu, &data.nu, &cfg.params, &cfg.schedule, &cfg.run.iteration())?;
        println!(
            "case {case}: margins {:.3e} / {:.3e}, iterate excess {:.3e}, holds {}",
            rep.margin_u, rep.margin_v, rep.iterate_excess, rep.holds
        );
    }
    Ok(())
}
