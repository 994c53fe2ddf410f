//! Per-case quantities that stay bounded along the Picard iterates for
//! small data, evaluated on each iterate and summarised over `n`.

use serde::Serialize;

use crate::data::Case;
use crate::error::{invalid, Result};
use crate::field::{Field, GridGeometry};
use crate::norms::{uniformly_local_norm, NormSpec};
use crate::phi::Phi;
use crate::system::{IterationTrace, SystemParams, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    U,
    V,
    /// The same norm of `u` plus that of `v`.
    Sum,
}

/// `t^{t_power} Φ(1/t)^{log_power} · ‖component(t)‖`, with `norm = None`
/// meaning the sup norm.
#[derive(Debug, Clone)]
pub struct Quantity {
    pub name: String,
    pub component: Component,
    pub norm: Option<NormSpec>,
    pub t_power: f64,
    pub log_power: f64,
}

#[derive(Debug, Clone)]
pub struct Monitor {
    pub case: Case,
    pub quantities: Vec<Quantity>,
    /// `Φ` in the time weights.
    pub phi: Phi,
    pub window: f64,
    /// Center stride for windowed norms (1 in one dimension, 2 otherwise).
    pub stride: usize,
    /// Every `time_stride`-th slice is evaluated (the last always is).
    pub time_stride: usize,
}

fn q(name: &str, component: Component, norm: Option<NormSpec>, t_power: f64, log_power: f64) -> Quantity {
    Quantity { name: name.to_string(), component, norm, t_power, log_power }
}

impl Monitor {
    /// Quantities for the case of `params`. Cases A, B, C use the window
    /// `min(√T, L/4)`, cases D, E, F the unit window capped at `L/4`. `phi`
    /// overrides `Φ = log(e+·)` in cases D and E.
    pub fn for_case(params: &SystemParams, geometry: &GridGeometry, horizon: f64, phi: Option<Phi>) -> Result<Monitor> {
        let case = params.case().case;
        let (n, p, qq) = (params.dim as f64, params.p, params.q);
        let e = params.exponents();
        let log = Phi::log(1.0);
        let quarter = 0.25 * geometry.half_width();
        let window = match case {
            Case::A | Case::B | Case::C => horizon.sqrt().min(quarter),
            _ => quarter.min(1.0),
        };
        let ul = |spec: NormSpec| Some(spec.windowed(window));
        let (quantities, phi) = match case {
            Case::A => {
                let ea = params.check_case_a()?;
                (
                    vec![
                        q("morrey_u", Component::U, Some(NormSpec::morrey(ea.r1_star, ea.alpha_a, window)), 0.0, 0.0),
                        q("linf_u", Component::U, None, 0.5 * n / ea.r1_star, 0.0),
                        q("morrey_v", Component::V, Some(NormSpec::morrey(ea.r2_star, ea.beta_a, window)), 0.0, 0.0),
                        q("linf_v", Component::V, None, 0.5 * n / ea.r2_star, 0.0),
                    ],
                    Phi::Identity,
                )
            }
            Case::B => {
                let r0 = (qq + 1.0) / (p + 1.0);
                let r = 0.5 * (r0 + qq);
                let alpha_star = 0.5 * e.beta_b;
                (
                    vec![
                        q("primed_u", Component::U, ul(NormSpec::primed(r0, e.alpha_b, log.clone())), 0.0, 0.0),
                        q(
                            "strong_u",
                            Component::U,
                            ul(NormSpec::strong(r, alpha_star, log.clone())),
                            0.5 * n * (1.0 / r0 - 1.0 / r),
                            p * e.beta_b - alpha_star / r,
                        ),
                        q("linf_u", Component::U, None, 0.5 * n / r0, p * e.beta_b),
                        q("strong_v", Component::V, ul(NormSpec::strong(1.0, e.beta_b, log.clone())), 0.0, 0.0),
                        q("linf_v", Component::V, None, 0.5 * n, e.beta_b),
                    ],
                    log,
                )
            }
            Case::C => {
                let gamma = 0.25 * n;
                (
                    vec![
                        q("strong_sum", Component::Sum, ul(NormSpec::strong(1.0, 0.5 * n, log.clone())), 0.0, 0.0),
                        q(
                            "strong_p_sum",
                            Component::Sum,
                            ul(NormSpec::strong(p, gamma, log.clone())),
                            0.5 * n * (1.0 - 1.0 / p),
                            -gamma / p + 0.5 * n,
                        ),
                        q("linf_sum", Component::Sum, None, 0.5 * n, 0.5 * n),
                    ],
                    log,
                )
            }
            Case::D | Case::E => {
                let r_low = (n * qq / (n + 2.0)).max(1.0 / p);
                let r_star = 0.5 * (r_low + qq);
                (
                    vec![
                        q(
                            "lr_u",
                            Component::U,
                            ul(NormSpec::strong(r_star, 0.0, Phi::Identity)),
                            0.5 * n * ((n + 2.0) / (n * qq) - 1.0 / r_star),
                            1.0,
                        ),
                        q("linf_u", Component::U, None, (n + 2.0) / (2.0 * qq), 1.0),
                        q("l1_v", Component::V, ul(NormSpec::strong(1.0, 0.0, Phi::Identity)), 0.0, 0.0),
                        q("linf_v", Component::V, None, 0.5 * n, 0.0),
                    ],
                    phi.unwrap_or(log),
                )
            }
            Case::F => (
                vec![
                    q("l1_u", Component::U, ul(NormSpec::strong(1.0, 0.0, Phi::Identity)), 0.0, 0.0),
                    q("linf_u", Component::U, None, 0.5 * n, 0.0),
                    q("l1_v", Component::V, ul(NormSpec::strong(1.0, 0.0, Phi::Identity)), 0.0, 0.0),
                    q("linf_v", Component::V, None, 0.5 * n, 0.0),
                ],
                Phi::Identity,
            ),
        };
        if window < 2.0 * geometry.spacing() {
            return invalid(format!(
                "monitor window {window} is below two cells (h = {}); refine the grid",
                geometry.spacing()
            ));
        }
        let stride = if params.dim == 1 { 1 } else { 2 };
        Ok(Monitor { case, quantities, phi, window, stride, time_stride: 1 })
    }

    pub fn with_strides(mut self, stride: usize, time_stride: usize) -> Self {
        self.stride = stride.max(1);
        self.time_stride = time_stride.max(1);
        self
    }

    pub fn names(&self) -> Vec<String> {
        self.quantities.iter().map(|q| q.name.clone()).collect()
    }

    fn norm_of(&self, field: &Field, spec: &Option<NormSpec>) -> Result<f64> {
        match spec {
            None => Ok(field.max()),
            Some(s) => uniformly_local_norm(field, s, self.stride),
        }
    }

    /// `sup_{t_j > 0}` of every quantity.
    pub fn evaluate(&self, u: &Trajectory, v: &Trajectory) -> Result<Vec<f64>> {
        let jn = u.fields.len() - 1;
        let slices: Vec<usize> = (1..=jn).filter(|j| j % self.time_stride == 0 || *j == jn).collect();
        self.quantities
            .iter()
            .map(|qty| {
                let mut best = 0.0f64;
                for &j in &slices {
                    let t = u.times[j];
                    let value = match qty.component {
                        Component::U => self.norm_of(&u.fields[j], &qty.norm)?,
                        Component::V => self.norm_of(&v.fields[j], &qty.norm)?,
                        Component::Sum => self.norm_of(&u.fields[j], &qty.norm)? + self.norm_of(&v.fields[j], &qty.norm)?,
                    };
                    let weight = t.powf(qty.t_power) * self.phi.weight_at_recip(t, qty.log_power);
                    best = best.max(weight * value);
                }
                Ok(best)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorReport {
    pub case: Case,
    pub names: Vec<String>,
    /// `per_n[n][k]`: quantity `k` on iterate `n`.
    pub per_n: Vec<Vec<f64>>,
    pub max_over_n: Vec<f64>,
    /// `max_n / value at n = 0`.
    pub ratio: Vec<f64>,
    pub bounded: Vec<bool>,
    pub all_bounded: bool,
}

/// Summarises the monitored values of a trace; bounded means
/// `max_n Q_n ≤ 2 Q_0`.
pub fn monitor_bounded_quantities(trace: &IterationTrace, monitor: &Monitor) -> Result<MonitorReport> {
    let names = monitor.names();
    let per_n: Vec<Vec<f64>> = trace
        .records
        .iter()
        .filter(|r| r.monitored.len() == names.len())
        .map(|r| r.monitored.clone())
        .collect();
    if per_n.is_empty() {
        return invalid("trace carries no monitored values; run the iteration with this monitor");
    }
    let k = names.len();
    let max_over_n: Vec<f64> = (0..k).map(|i| per_n.iter().map(|row| row[i]).fold(0.0, f64::max)).collect();
    let ratio: Vec<f64> = (0..k)
        .map(|i| {
            let base = per_n[0][i];
            if base > 0.0 {
                max_over_n[i] / base
            } else if max_over_n[i] == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let bounded: Vec<bool> = ratio.iter().map(|r| *r <= 2.0).collect();
    let all_bounded = bounded.iter().all(|b| *b);
    Ok(MonitorReport { case: monitor.case, names, per_n, max_over_n, ratio, bounded, all_bounded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_data, DataFamily};
    use crate::system::{run_iteration, IterationOptions, TimeSchedule, Verdict};

    fn run(params: SystemParams, g: GridGeometry, fam: DataFamily, t: f64) -> (IterationTrace, Monitor) {
        let d = make_data(&fam, &params, &g).unwrap();
        let sched = TimeSchedule::new(t, 16, 2.0).unwrap();
        let mon = Monitor::for_case(&params, &g, t, None).unwrap().with_strides(2, 2);
        let f = |u: &Trajectory, v: &Trajectory| mon.evaluate(u, v);
        let tr = run_iteration(&d.mu, &d.nu, &params, &sched, &IterationOptions::default(), Some(&f)).unwrap();
        (tr, mon)
    }

    #[test]
    fn zero_data_monitors_vanish() {
        let params = SystemParams::new(1, 3.0, 3.0, 1.0, 1.0).unwrap();
        let g = GridGeometry::new(1, 4.0, 256).unwrap();
        let (tr, mon) = run(params, g, DataFamily::new(Case::C, 0.0, 0.0), 0.25);
        let rep = monitor_bounded_quantities(&tr, &mon).unwrap();
        assert!(rep.max_over_n.iter().all(|v| *v == 0.0));
        assert!(rep.all_bounded);
    }

    #[test]
    fn case_c_small_data_bounded() {
        let params = SystemParams::new(1, 3.0, 3.0, 1.0, 1.0).unwrap();
        let g = GridGeometry::new(1, 4.0, 512).unwrap();
        let (tr, mon) = run(params, g, DataFamily::new(Case::C, 0.05, 0.05), 0.25);
        assert_eq!(tr.verdict, Verdict::Converged);
        let rep = monitor_bounded_quantities(&tr, &mon).unwrap();
        assert!(rep.all_bounded, "{rep:?}");
    }

    #[test]
    fn case_b_small_data_bounded() {
        let params = SystemParams::new(2, 1.5, 4.0, 1.0, 1.0).unwrap();
        let g = GridGeometry::new(2, 4.0, 64).unwrap();
        let (tr, mon) = run(params, g, DataFamily::new(Case::B, 0.02, 0.02), 0.25);
        assert_eq!(tr.verdict, Verdict::Converged);
        let rep = monitor_bounded_quantities(&tr, &mon).unwrap();
        assert!(rep.all_bounded, "{rep:?}");
        assert_eq!(rep.names[1], "strong_u");
    }
}
