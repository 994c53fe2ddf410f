//! Axiom constants and asymptotic comparability for the built-in Φ.

use semilinear_lab::phi::{phi_axiom_report, Phi};
use semilinear_lab::verify::{phi_asymptotics_report, AsymptoticsOptions};

fn main() -> semilinear_lab::Result<()> {
    for phi in [Phi::Identity, Phi::log(1.0), Phi::log(2.0)] {
        let ax = phi_axiom_report(&phi)?;
        let asy = phi_asymptotics_report(&phi, &AsymptoticsOptions::default());
        println!("{}: Φ(0) = {}, Φ2 constant {:.4}, axioms {}, comparable {}", ax.phi, ax.phi0, ax.phi2_constant, ax.passed, asy.all_bounded);
        for e in &ax.phi3 {
            println!("  Φ3 δ = {}: τ_δ = {:.3e}, C_δ = {:.4}, bounded {}", e.delta, e.tau_delta, e.c_delta, e.bounded);
        }
    }
    Ok(())
}
