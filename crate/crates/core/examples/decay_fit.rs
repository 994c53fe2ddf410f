//! Log-log decay fit of ‖S(t)δ‖_∞ and the case-C compensated quantity.

use semilinear_lab::data::{make_data, Case, DataFamily};
use semilinear_lab::field::Field;
use semilinear_lab::norms::NormSpec;
use semilinear_lab::phi::Phi;
use semilinear_lab::system::SystemParams;
use semilinear_lab::verify::{dyadic_times, fit_semigroup_decay, FitOptions};
use semilinear_lab::GridGeometry;

fn main() -> semilinear_lab::Result<()> {
    let opts = FitOptions::default();
    let linf = NormSpec::weak(f64::INFINITY, 0.0, Phi::Identity);
    let g = GridGeometry::new(1, 8.0, 4096)?;
    let dirac = Field::point_mass(g, g.origin_index(), 1.0)?;
    let l1 = NormSpec::strong(1.0, 0.0, Phi::Identity).windowed(1.0);
    let fit = fit_semigroup_decay(&dirac, &l1, &linf, 1.0, &dyadic_times(1, 12), &opts)?;
    println!("near-Dirac N=1: slope {:.4} (predicted {}), R² {:.5}", fit.slope, fit.predicted_slope, fit.r_squared);

    let params = SystemParams::new(1, 3.0, 3.0, 1.0, 1.0)?;
    let g = GridGeometry::new(1, 8.0, 8192)?;
    let mu = make_data(&DataFamily::new(Case::C, 1.0, 1.0), &params, &g)?.mu;
    let log = Phi::log(1.0);
    let times: Vec<f64> = (0..=12).map(|k| 1e-4 * 10f64.powf(k as f64 / 4.0)).collect();
    let fit = fit_semigroup_decay(&mu, &NormSpec::strong(1.0, 0.5, log.clone()).windowed(1.0), &NormSpec::weak(f64::INFINITY, 0.0, log), 1.0, &times, &opts)?;
    println!("case C: compensated max/min {:.4}, outcome {:?}", fit.compensated_ratio, fit.outcome);
    fit.write_csv(std::io::stdout())?;
    Ok(())
}
