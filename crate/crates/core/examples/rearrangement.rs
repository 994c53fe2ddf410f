//! Decreasing rearrangement of a sampled profile, its maximal average, and
//! the kernel rearrangement against the closed form.

use semilinear_lab::field::{sample_radial, PowerLogProfile};
use semilinear_lab::heat::kernel_rearrangement_error;
use semilinear_lab::rearrangement::{distribution_function, rearrange};
use semilinear_lab::GridGeometry;

fn main() -> semilinear_lab::Result<()> {
    let g = GridGeometry::new(1, 4.0, 256)?;
    let f = sample_radial(&g, &PowerLogProfile::power(1.0, 0.5, 2.0))?;
    let p = rearrange(&f);
    println!("{} steps, measure {:.4}, mass {:.6}", p.len(), p.total_measure(), p.total_mass());
    for s in [0.01, 0.1, 0.5, 1.0, 2.0, 4.0] {
        println!("s = {s:<5} f* = {:.6}  f** = {:.6}", p.f_star(s), p.f_star_star(s)?);
    }
    println!("|{{f > 1}}| = {:.6}", distribution_function(&f, 1.0)?);
    println!("‖f‖_2 = {:.10} (field) vs {:.10} (profile)", f.lp_norm(2.0), p.lr_norm(2.0));

    for (n, m) in [(1, 512), (2, 256)] {
        for t in [0.01, 0.1] {
            let coarse = kernel_rearrangement_error(&GridGeometry::new(n, 2.0, m)?, 1.0, t)?;
            let fine = kernel_rearrangement_error(&GridGeometry::new(n, 2.0, 2 * m)?, 1.0, t)?;
            println!("kernel N={n} t={t}: error {coarse:.3e} at M={m}, {fine:.3e} at M={}", 2 * m);
        }
    }
    Ok(())
}
