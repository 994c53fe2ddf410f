//! Spatially constant data reduce the system to `u' = v^p`, `v' = u^q`;
//! the Picard iterates are compared against a fine RK4 reference.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::field::{Field, GridGeometry};
use crate::system::{run_iteration, IterationOptions, SystemParams, TimeSchedule, Verdict};

#[derive(Debug, Clone, Serialize)]
pub struct OdeCheck {
    pub p: f64,
    pub q: f64,
    pub u0: f64,
    pub v0: f64,
    /// First time the reference `u` reaches `growth · u0`.
    pub horizon: f64,
    pub slices: usize,
    pub iterations: usize,
    pub verdict: Verdict,
    pub reference: [f64; 2],
    pub picard: [f64; 2],
    pub relative_error: f64,
}

fn rate(p: f64, q: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1].max(0.0).powf(p), y[0].max(0.0).powf(q)]
}

fn rk4_step(p: f64, q: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let add = |a: [f64; 2], k: [f64; 2], s: f64| [a[0] + s * k[0], a[1] + s * k[1]];
    let k1 = rate(p, q, y);
    let k2 = rate(p, q, add(y, k1, 0.5 * h));
    let k3 = rate(p, q, add(y, k2, 0.5 * h));
    let k4 = rate(p, q, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// RK4 solution at `t` with `steps` equal steps.
pub fn ode_reference(p: f64, q: f64, y0: [f64; 2], t: f64, steps: usize) -> [f64; 2] {
    let h = t / steps as f64;
    (0..steps).fold(y0, |y, _| rk4_step(p, q, y, h))
}

fn growth_time(p: f64, q: f64, y0: [f64; 2], growth: f64) -> Result<f64> {
    let h = 1e-5;
    let mut y = y0;
    let mut t = 0.0;
    while y[0] < growth * y0[0] {
        y = rk4_step(p, q, y, h);
        t += h;
        if t > 1e3 || !y[0].is_finite() {
            return invalid("the reference never reaches the requested growth");
        }
    }
    Ok(t)
}

/// Runs the Picard iteration on constant data `(u0, v0)` up to the time
/// the reference `u` grows by `growth`, on a uniform mesh of `slices`.
pub fn constant_data_ode_check(
    params: &SystemParams,
    u0: f64,
    v0: f64,
    growth: f64,
    slices: usize,
    options: &IterationOptions,
) -> Result<OdeCheck> {
    if !(u0 > 0.0 && v0 > 0.0 && growth > 1.0) {
        return invalid("constant-data check needs u0, v0 > 0 and growth > 1");
    }
    let (p, q) = (params.p, params.q);
    let horizon = growth_time(p, q, [u0, v0], growth)?;
    let reference = ode_reference(p, q, [u0, v0], horizon, 200_000);
    let g = GridGeometry::new(params.dim, 4.0, 8)?;
    let schedule = TimeSchedule::new(horizon, slices, 1.0)?;
    let trace = run_iteration(&Field::constant(g, u0)?, &Field::constant(g, v0)?, params, &schedule, options, None)?;
    let picard = [trace.u.last().max(), trace.v.last().max()];
    let relative_error = (0..2)
        .map(|i| (picard[i] - reference[i]).abs() / reference[i])
        .fold(0.0, f64::max);
    Ok(OdeCheck {
        p,
        q,
        u0,
        v0,
        horizon,
        slices,
        iterations: trace.iterations(),
        verdict: trace.verdict,
        reference,
        picard,
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_matches_riccati() {
        // u = v = 1/(1 − t) for p = q = 2
        let y = ode_reference(2.0, 2.0, [1.0, 1.0], 0.5, 2000);
        assert!((y[0] - 2.0).abs() < 1e-10 && (y[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn picard_tracks_ode() {
        let params = SystemParams::new(1, 2.0, 2.0, 1.0, 1.0).unwrap();
        let opts = IterationOptions { n_max: 80, ..Default::default() };
        let chk = constant_data_ode_check(&params, 1.0, 1.0, 2.0, 2000, &opts).unwrap();
        assert_eq!(chk.verdict, Verdict::Converged);
        assert!(chk.relative_error < 1e-2, "{chk:?}");
    }
}
