//! Explicit supersolutions for cases A and F and the pointwise checks that
//! they dominate one Picard step.

use serde::Serialize;

use crate::data::Case;
use crate::error::{invalid, Result};
use crate::field::Field;
use crate::heat::{HeatModel, Propagator};
use crate::system::{run_iteration, IterationContext, IterationOptions, SystemParams, TimeSchedule, Trajectory, Verdict};

/// Margins below `−MARGIN_TOLERANCE · scale` count as violations.
pub const MARGIN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Supersolution {
    pub case: Case,
    pub w: Trajectory,
    pub u_bar: Trajectory,
    pub v_bar: Trajectory,
}

fn require_unit_max_diffusivity(params: &SystemParams) -> Result<()> {
    if (params.max_diffusivity() - 1.0).abs() > 1e-12 {
        return invalid(format!(
            "supersolutions assume max(D1, D2) = 1, got {}; apply normalize_diffusivity first",
            params.max_diffusivity()
        ));
    }
    Ok(())
}

fn context(
    mu: &Field,
    nu: &Field,
    params: &SystemParams,
    schedule: &TimeSchedule,
    model: HeatModel,
) -> Result<IterationContext> {
    IterationContext::new(*params, *schedule, mu.clone(), nu.clone(), model)
}

/// `w = S(t)(μ^{αA} + ν^{βA})`, `ū = 2D^{−N/2} w^{1/αA}`, `v̄ = 2D^{−N/2} w^{1/βA}`.
pub fn build_supersolution_case_a(
    mu: &Field,
    nu: &Field,
    params: &SystemParams,
    schedule: &TimeSchedule,
    model: HeatModel,
) -> Result<Supersolution> {
    let e = params.check_case_a()?;
    require_unit_max_diffusivity(params)?;
    let ctx = context(mu, nu, params, schedule, model)?;
    let source = mu.pointwise_power(e.alpha_a).add(&nu.pointwise_power(e.beta_a))?;
    let w = ctx.free_trajectory(&source, 1.0);
    let factor = 2.0 * params.min_diffusivity().powf(-0.5 * params.dim as f64);
    let map = |exponent: f64| Trajectory {
        times: w.times.clone(),
        fields: w
            .fields
            .iter()
            .map(|f| f.pointwise_power(exponent).scale(factor).expect("finite factor"))
            .collect(),
    };
    let u_bar = map(1.0 / e.alpha_a);
    let v_bar = map(1.0 / e.beta_a);
    Ok(Supersolution { case: Case::A, w, u_bar, v_bar })
}

/// `w = 2D^{−N/2} S(t)(μ + ν) + 2t`, used for both components.
pub fn build_supersolution_case_f(
    mu: &Field,
    nu: &Field,
    params: &SystemParams,
    schedule: &TimeSchedule,
    model: HeatModel,
) -> Result<Supersolution> {
    if params.case().case != Case::F {
        return invalid(format!("case F required, parameters are in case {}", params.case().case));
    }
    require_unit_max_diffusivity(params)?;
    let ctx = context(mu, nu, params, schedule, model)?;
    let factor = 2.0 * params.min_diffusivity().powf(-0.5 * params.dim as f64);
    let smooth = ctx.free_trajectory(&mu.add(nu)?, 1.0);
    let fields = smooth
        .fields
        .iter()
        .zip(&smooth.times)
        .map(|(f, t)| {
            let vals = f.values().iter().map(|x| factor * x + 2.0 * t).collect();
            Field::new(*f.geometry(), vals).expect("non-negative")
        })
        .collect();
    let w = Trajectory { times: smooth.times.clone(), fields };
    Ok(Supersolution { case: Case::F, u_bar: w.clone(), v_bar: w.clone(), w })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupersolutionReport {
    pub case: Case,
    /// `min (ū − P_u(ū, v̄)) / scale` over slice times `t_j > 0` and cells.
    pub margin_u: f64,
    pub margin_v: f64,
    pub scale: f64,
    /// `max |S(t_j − t_k) w(t_k) − w(t_j)| / max w(t_k)` (case A), or the
    /// most negative `(w(t_j) − S(t_j − t_k) w(t_k)) / scale` (case F).
    pub semigroup_check: f64,
    pub semigroup_ok: bool,
    pub iteration_verdict: Verdict,
    /// `max (u_n − ū, v_n − v̄) / scale` for the last iterate.
    pub iterate_excess: f64,
    pub holds: bool,
}

fn min_margin(bar: &Trajectory, image: &Trajectory) -> f64 {
    bar.fields[1..]
        .iter()
        .zip(&image.fields[1..])
        .map(|(b, i)| {
            b.values()
                .iter()
                .zip(i.values())
                .map(|(x, y)| x - y)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

fn slice_pairs(jn: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let picks = [0, 1, jn / 4, jn / 2, jn - 1];
    for &k in &picks {
        for &j in &[jn / 2, jn] {
            if k < j && !pairs.contains(&(k, j)) {
                pairs.push((k, j));
            }
        }
    }
    pairs
}

/// Checks `P(ū, v̄) ≤ (ū, v̄)`, the semigroup relation of `w`, and
/// `u_n ≤ ū`, `v_n ≤ v̄` for the Picard iterates of the same data.
pub fn check_supersolution(
    mu: &Field,
    nu: &Field,
    params: &SystemParams,
    schedule: &TimeSchedule,
    options: &IterationOptions,
) -> Result<SupersolutionReport> {
    let model = options.heat_model;
    let sup = match params.case().case {
        Case::A => build_supersolution_case_a(mu, nu, params, schedule, model)?,
        Case::F => build_supersolution_case_f(mu, nu, params, schedule, model)?,
        c => return invalid(format!("supersolutions are built for cases A and F, not {c}")),
    };
    let ctx = context(mu, nu, params, schedule, model)?;
    let (pu, pv, _) = ctx.step(&sup.u_bar, &sup.v_bar);
    let scale = sup.u_bar.sup_positive_times().max(sup.v_bar.sup_positive_times()).max(f64::MIN_POSITIVE);
    let margin_u = min_margin(&sup.u_bar, &pu) / scale;
    let margin_v = min_margin(&sup.v_bar, &pv) / scale;

    let prop = Propagator::with_model(mu.geometry(), model);
    let jn = schedule.slices;
    let times = &sup.w.times;
    let mut semigroup_check: f64 = match sup.case {
        Case::A => 0.0,
        _ => f64::INFINITY,
    };
    for (k, j) in slice_pairs(jn) {
        let (moved, _) = prop.apply(sup.w.fields[k].values(), times[j] - times[k]);
        let target = sup.w.fields[j].values();
        match sup.case {
            Case::A => {
                let src = sup.w.fields[k].max().max(f64::MIN_POSITIVE);
                let err = moved.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                semigroup_check = semigroup_check.max(err / src);
            }
            _ => {
                let m = target.iter().zip(&moved).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
                semigroup_check = semigroup_check.min(m / scale);
            }
        }
    }
    let semigroup_ok = match sup.case {
        Case::A => semigroup_check <= 1e-12,
        _ => semigroup_check >= -MARGIN_TOLERANCE,
    };

    let trace = run_iteration(mu, nu, params, schedule, options, None)?;
    let excess = |it: &Trajectory, bar: &Trajectory| -> f64 {
        -min_margin(bar, it)
    };
    let iterate_excess = excess(&trace.u, &sup.u_bar).max(excess(&trace.v, &sup.v_bar)) / scale;
    let holds = margin_u >= -MARGIN_TOLERANCE
        && margin_v >= -MARGIN_TOLERANCE
        && semigroup_ok
        && iterate_excess <= MARGIN_TOLERANCE;
    Ok(SupersolutionReport {
        case: sup.case,
        margin_u,
        margin_v,
        scale,
        semigroup_check,
        semigroup_ok,
        iteration_verdict: trace.verdict,
        iterate_excess,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_data, DataFamily, NuShape};
    use crate::field::GridGeometry;

    #[test]
    fn zero_data_gives_zero_w() {
        let g = GridGeometry::new(2, 4.0, 32).unwrap();
        let z = Field::zeros(g);
        let params = SystemParams::new(2, 2.0, 3.0, 1.0, 1.0).unwrap();
        let sched = TimeSchedule::new(0.1, 8, 2.0).unwrap();
        let s = build_supersolution_case_a(&z, &z, &params, &sched, HeatModel::Lattice).unwrap();
        assert!(s.w.fields.iter().all(|f| f.max() == 0.0));
    }

    #[test]
    fn case_a_small_data() {
        let g = GridGeometry::new(2, 4.0, 64).unwrap();
        let params = SystemParams::new(2, 2.0, 3.0, 1.0, 1.0).unwrap();
        let d = make_data(&DataFamily::new(Case::A, 0.01, 0.01), &params, &g).unwrap();
        let sched = TimeSchedule::new(0.04, 16, 2.0).unwrap();
        let rep = check_supersolution(&d.mu, &d.nu, &params, &sched, &IterationOptions::default()).unwrap();
        assert!(rep.holds, "{rep:?}");
        let bad = SystemParams::new(2, 2.0, 3.0, 2.0, 1.0).unwrap();
        assert!(build_supersolution_case_a(&d.mu, &d.nu, &bad, &sched, HeatModel::Lattice).is_err());
    }

    #[test]
    fn case_f_constant_and_small_data() {
        let g = GridGeometry::new(1, 4.0, 64).unwrap();
        let params = SystemParams::new(1, 1.2, 2.0, 1.0, 0.5).unwrap();
        let c = 0.3;
        let k = Field::constant(g, c).unwrap();
        let sched = TimeSchedule::new(0.1, 8, 2.0).unwrap();
        let s = build_supersolution_case_f(&k, &k, &params, &sched, HeatModel::Lattice).unwrap();
        let factor = 2.0 * 0.5f64.powf(-0.5);
        for (f, t) in s.w.fields.iter().zip(&s.w.times) {
            let expect = factor * 2.0 * c + 2.0 * t;
            assert!(f.values().iter().all(|x| (x - expect).abs() < 1e-13));
        }
        let fam = DataFamily::new(Case::F, 0.05, 0.05).with_nu(1.0, NuShape::Ball);
        let d = make_data(&fam, &params, &g).unwrap();
        let sched = TimeSchedule::new(0.05, 16, 2.0).unwrap();
        let rep = check_supersolution(&d.mu, &d.nu, &params, &sched, &IterationOptions::default()).unwrap();
        assert!(rep.holds, "{rep:?}");
    }
}
