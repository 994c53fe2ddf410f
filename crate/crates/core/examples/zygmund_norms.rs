//! Weak, strong-average, primed and Morrey norms of the case-C profile.

use semilinear_lab::data::{make_data, Case, DataFamily};
use semilinear_lab::norms::{evaluate, morrey_norm, NormSpec};
use semilinear_lab::phi::Phi;
use semilinear_lab::system::SystemParams;
use semilinear_lab::GridGeometry;

fn main() -> semilinear_lab::Result<()> {
    let params = SystemParams::new(1, 3.0, 3.0, 1.0, 1.0)?;
    let log = Phi::log(1.0);
    for m in [256, 1024, 4096] {
        let g = GridGeometry::new(1, 4.0, m)?;
        let mu = make_data(&DataFamily::new(Case::C, 1.0, 1.0), &params, &g)?.mu;
        let weak = evaluate(&mu, &NormSpec::weak(1.0, 0.5, log.clone()))?;
        let strong = evaluate(&mu, &NormSpec::strong(1.0, 0.5, log.clone()).windowed(1.0))?;
        let primed = evaluate(&mu, &NormSpec::primed(2.0, 0.0, Phi::Identity))?;
        let morrey = morrey_norm(&mu, 1.5, 1.0, 1.0)?;
        println!("M={m:<5} weak {weak:.5}  strong(R=1) {strong:.5}  primed L^2 {primed:.5}  M(1.5,1;1) {morrey:.5}");
    }
    Ok(())
}
