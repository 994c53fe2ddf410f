//! Spectral heat semigroup against the direct quadrature oracle.

use semilinear_lab::field::{sample_radial, PowerLogProfile};
use semilinear_lab::heat::{direct_quadrature_oracle, heat_apply};
use semilinear_lab::GridGeometry;

fn main() -> semilinear_lab::Result<()> {
    let g = GridGeometry::new(1, 2.0, 32)?;
    let f = sample_radial(&g, &PowerLogProfile::indicator(0.5))?;
    for t in [0.05, 0.1, 0.5] {
        let spectral = heat_apply(&f, 1.0, t)?;
        let oracle = direct_quadrature_oracle(&f, 1.0, t)?;
        println!(
            "t = {t}: max diff {:.3e}, mass {:.12} -> {:.12}, tail certificate {:.1e}",
            spectral.field.max_abs_diff(&oracle)?,
            f.integral(),
            spectral.field.integral(),
            spectral.tail_certificate
        );
    }
    let a = heat_apply(&heat_apply(&f, 1.0, 0.1)?.field, 1.0, 0.2)?.field;
    let b = heat_apply(&f, 1.0, 0.3)?.field;
    println!("S(0.1)S(0.2) vs S(0.3): {:.3e}", a.max_abs_diff(&b)?);
    Ok(())
}
