//! Spatially constant data: Picard iterates against an RK4 reference.

use semilinear_lab::system::{IterationOptions, SystemParams};
use semilinear_lab::verify::constant_data_ode_check;

fn main() -> semilinear_lab::Result<()> {
    let opts = IterationOptions { n_max: 80, ..Default::default() };
    for (p, q) in [(2.0, 2.0), (2.0, 3.0)] {
        let params = SystemParams::new(1, p, q, 1.0, 1.0)?;
        for slices in [2000, 20000] {
            let c = constant_data_ode_check(&params, 1.0, 1.0, 2.0, slices, &opts)?;
            println!(
                "p={p} q={q} J={slices}: T = {:.5}, u = {:.8} vs {:.8}, rel err {:.2e}",
                c.horizon, c.picard[0], c.reference[0], c.relative_error
            );
        }
    }
    Ok(())
}
