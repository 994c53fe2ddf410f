//! System (P): parameters, the monotone Picard iteration and the scaling map.
//!
//! Mild solutions satisfy
//! `u(t) = S(D1 t)μ + ∫_0^t S(D1(t−s)) v(s)^p ds` and the symmetric equation
//! for `v`. Iterates are computed on a graded time mesh `t_j = T (j/J)^γ`
//! with the left-endpoint rule, entirely in Fourier space:
//! `Â_j = e^{−D λ Δ_j} (Â_{j−1} + Δ_j ĝ_{j−1})`.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::{classify_case, Case, CaseLabel};
use crate::error::{invalid, Error, Result};
use crate::field::{Field, GridGeometry};
use crate::heat::{HeatModel, Propagator};

/// `(N, p, q, D1, D2)` with an optional case-A exponent `βA`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "D1", default = "one")]
    pub d1: f64,
    #[serde(rename = "D2", default = "one")]
    pub d2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_a: Option<f64>,
}

fn one() -> f64 {
    1.0
}

/// Exponents derived from `(N, p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub r1_star: f64,
    pub r2_star: f64,
    pub alpha_a: f64,
    pub beta_a: f64,
    pub alpha_b: f64,
    pub beta_b: f64,
    pub delta_de: f64,
}

impl SystemParams {
    pub fn new(dim: usize, p: f64, q: f64, d1: f64, d2: f64) -> Result<Self> {
        let s = Self { dim, p, q, d1, d2, beta_a: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_beta_a(mut self, beta_a: f64) -> Result<Self> {
        self.beta_a = Some(beta_a);
        self.validate()?;
        Ok(self)
    }

    pub fn with_diffusivities(mut self, d1: f64, d2: f64) -> Result<Self> {
        self.d1 = d1;
        self.d2 = d2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return invalid(format!("N = {} must be 1, 2 or 3", self.dim));
        }
        classify_case(self.dim, self.p, self.q)?;
        for (name, d) in [("D1", self.d1), ("D2", self.d2)] {
            if !(d > 0.0 && d.is_finite()) {
                return invalid(format!("{name} = {d} must be positive"));
            }
        }
        if let Some(b) = self.beta_a {
            let (lo, hi, cap) = self.beta_a_range();
            if !(b > lo && b < hi && b <= cap) {
                return invalid(format!(
                    "beta_a = {b} must satisfy 1 < beta_a < q(p+1)/(q+1) = {hi} and beta_a <= r2* = {cap}"
                ));
            }
        }
        Ok(())
    }

    fn beta_a_range(&self) -> (f64, f64, f64) {
        let (n, p, q) = (self.dim as f64, self.p, self.q);
        (1.0, q * (p + 1.0) / (q + 1.0), 0.5 * n * (p * q - 1.0) / (q + 1.0))
    }

    pub fn case(&self) -> CaseLabel {
        classify_case(self.dim, self.p, self.q).expect("validated parameters")
    }

    /// `max(D1, D2)`.
    pub fn max_diffusivity(&self) -> f64 {
        self.d1.max(self.d2)
    }

    pub fn min_diffusivity(&self) -> f64 {
        self.d1.min(self.d2)
    }

    pub fn exponents(&self) -> Exponents {
        let (n, p, q) = (self.dim as f64, self.p, self.q);
        let pq1 = p * q - 1.0;
        let r1_star = 0.5 * n * pq1 / (p + 1.0);
        let r2_star = 0.5 * n * pq1 / (q + 1.0);
        let (_, hi, cap) = self.beta_a_range();
        let beta_a = self.beta_a.unwrap_or_else(|| cap.min(0.5 * (1.0 + hi)));
        let alpha_a = (q + 1.0) / (p + 1.0) * beta_a;
        let alpha_b = (q + 1.0) / (p + 1.0) * p / pq1;
        let beta_b = 1.0 / pq1;
        let delta_de = -0.5 * n * (p - (n + 2.0) / (n * q)).max(0.0) + 1.0;
        Exponents { r1_star, r2_star, alpha_a, beta_a, alpha_b, beta_b, delta_de }
    }

    /// Rejects case-A work when the `βA` window is empty or violated.
    pub fn check_case_a(&self) -> Result<Exponents> {
        if self.case().case != Case::A {
            return invalid(format!("case A required, parameters are in case {}", self.case().case));
        }
        let e = self.exponents();
        let (lo, hi, cap) = self.beta_a_range();
        if !(e.beta_a > lo && e.beta_a < hi && e.beta_a <= cap) {
            return invalid(format!(
                "no admissible beta_a: need 1 < beta_a < {hi} with beta_a <= r2* = {cap}, got {}",
                e.beta_a
            ));
        }
        Ok(e)
    }
}

/// Graded slice times `t_j = T (j/J)^γ`, `j = 0..=J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSchedule {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "J")]
    pub slices: usize,
    #[serde(default = "default_grade")]
    pub grade: f64,
}

fn default_grade() -> f64 {
    2.0
}

impl TimeSchedule {
    pub fn new(horizon: f64, slices: usize, grade: f64) -> Result<Self> {
        let s = Self { horizon, slices, grade };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return invalid(format!("horizon T = {} must be positive", self.horizon));
        }
        if self.slices == 0 {
            return invalid("J must be at least 1");
        }
        if !(self.grade >= 1.0 && self.grade.is_finite()) {
            return invalid(format!("grade = {} must be >= 1", self.grade));
        }
        Ok(())
    }

    /// `t_0 = 0 < t_1 < … < t_J = T`.
    pub fn times(&self) -> Vec<f64> {
        let j = self.slices as f64;
        let mut t: Vec<f64> = (0..=self.slices)
            .map(|k| self.horizon * (k as f64 / j).powf(self.grade))
            .collect();
        t[self.slices] = self.horizon;
        t
    }
}

/// Fields at the slice times, index 0 being the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
}

impl Trajectory {
    /// `max_j ‖·(t_j)‖_∞` over `j ≥ 1`.
    pub fn sup_positive_times(&self) -> f64 {
        self.fields[1..].iter().map(Field::max).fold(0.0, f64::max)
    }

    pub fn last(&self) -> &Field {
        self.fields.last().expect("non-empty trajectory")
    }

    fn sup_diff(&self, other: &Trajectory) -> f64 {
        self.fields[1..]
            .iter()
            .zip(&other.fields[1..])
            .map(|(a, b)| a.max_abs_diff(b).expect("same geometry"))
            .fold(0.0, f64::max)
    }

    /// Largest drop `other − self` over positive times.
    fn max_drop_below(&self, other: &Trajectory) -> f64 {
        self.fields[1..]
            .iter()
            .zip(&other.fields[1..])
            .map(|(new, old)| {
                new.values()
                    .iter()
                    .zip(old.values())
                    .map(|(a, b)| b - a)
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    fn all_finite_below(&self, threshold: f64) -> bool {
        self.fields[1..]
            .iter()
            .all(|f| f.values().iter().all(|v| v.is_finite() && *v <= threshold))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationOptions {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_tol")]
    pub tol_converge: f64,
    #[serde(default = "default_blowup")]
    pub blowup_factor: f64,
    #[serde(default = "default_monotone")]
    pub monotone_tol: f64,
    #[serde(default = "default_model")]
    pub heat_model: HeatModel,
}

fn default_n_max() -> usize {
    30
}
fn default_tol() -> f64 {
    1e-8
}
fn default_blowup() -> f64 {
    1e12
}
fn default_monotone() -> f64 {
    1e-12
}
fn default_model() -> HeatModel {
    HeatModel::Lattice
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            n_max: default_n_max(),
            tol_converge: default_tol(),
            blowup_factor: default_blowup(),
            monotone_tol: default_monotone(),
            heat_model: default_model(),
        }
    }
}

impl IterationOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return invalid(format!("n_max = {} must be at least 2", self.n_max));
        }
        for (name, v) in [
            ("tol_converge", self.tol_converge),
            ("blowup_factor", self.blowup_factor),
            ("monotone_tol", self.monotone_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} = {v} must be positive"));
            }
        }
        Ok(())
    }
}

/// Precomputed state shared by all Picard steps of one experiment.
pub struct IterationContext {
    params: SystemParams,
    times: Vec<f64>,
    mu: Field,
    nu: Field,
    propagator: Propagator,
}

impl IterationContext {
    pub fn new(params: SystemParams, schedule: TimeSchedule, mu: Field, nu: Field, model: HeatModel) -> Result<Self> {
        params.validate()?;
        schedule.validate()?;
        if mu.geometry() != nu.geometry() {
            return Err(Error::GeometryMismatch);
        }
        if mu.geometry().dim() != params.dim {
            return invalid(format!("grid dimension {} differs from N = {}", mu.geometry().dim(), params.dim));
        }
        let propagator = Propagator::with_model(mu.geometry(), model);
        Ok(Self { params, times: schedule.times(), mu, nu, propagator })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.mu.geometry()
    }

    pub fn mu(&self) -> &Field {
        &self.mu
    }

    pub fn nu(&self) -> &Field {
        &self.nu
    }

    /// `t ↦ S(d t) f` at the slice times, by the same recursion as the step.
    pub fn free_trajectory(&self, data: &Field, d: f64) -> Trajectory {
        self.duhamel(data, d, None, 0.0).0
    }

    /// `(u_0, v_0) = (S(D1 t)μ, S(D2 t)ν)`.
    pub fn initial(&self) -> (Trajectory, Trajectory) {
        let (u, v) = rayon::join(
            || self.free_trajectory(&self.mu, self.params.d1),
            || self.free_trajectory(&self.nu, self.params.d2),
        );
        (u, v)
    }

    /// One Picard step; also returns the largest clamped mass encountered.
    pub fn step(&self, prev_u: &Trajectory, prev_v: &Trajectory) -> (Trajectory, Trajectory, f64) {
        let p = &self.params;
        let ((u, cu), (v, cv)) = rayon::join(
            || self.duhamel(&self.mu, p.d1, Some(prev_v), p.p),
            || self.duhamel(&self.nu, p.d2, Some(prev_u), p.q),
        );
        (u, v, cu.max(cv))
    }

    /// `S(d t_j) data + Σ_{k<j} (t_{k+1} − t_k) S(d(t_j − t_k)) forcing(t_k)^power`.
    fn duhamel(&self, data: &Field, d: f64, forcing: Option<&Trajectory>, power: f64) -> (Trajectory, f64) {
        let geometry = *self.geometry();
        let jn = self.times.len() - 1;
        let source: Vec<Option<Vec<Complex64>>> = match forcing {
            None => vec![None; jn],
            Some(tr) => (0..jn)
                .into_par_iter()
                .map(|k| {
                    let vals = tr.fields[k].values();
                    if vals.iter().all(|x| *x == 0.0) {
                        None
                    } else {
                        let g: Vec<f64> = vals.iter().map(|x| x.powf(power)).collect();
                        Some(self.propagator.forward(&g))
                    }
                })
                .collect(),
        };
        let mut acc = self.propagator.forward(data.values());
        let mut spectra = Vec::with_capacity(jn);
        for j in 1..=jn {
            let w = self.times[j] - self.times[j - 1];
            if let Some(g) = &source[j - 1] {
                for (a, b) in acc.iter_mut().zip(g) {
                    *a += b * w;
                }
            }
            self.propagator.decay(&mut acc, d * w);
            spectra.push(acc.clone());
        }
        let outs: Vec<(Vec<f64>, f64)> = spectra.into_par_iter().map(|s| self.propagator.to_values(s)).collect();
        let mut clamped = 0.0f64;
        let mut fields = Vec::with_capacity(jn + 1);
        fields.push(data.clone());
        for (vals, c) in outs {
            clamped = clamped.max(c);
            fields.push(Field::from_raw(geometry, vals));
        }
        (Trajectory { times: self.times.clone(), fields }, clamped)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    BlewUp,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::BlewUp => "blew_up",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Summary of iterate `n` (`n = 0` is the free evolution).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    /// `sup_j ‖u_n − u_{n−1}‖_∞ + sup_j ‖v_n − v_{n−1}‖_∞`; zero for `n = 0`.
    pub delta: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    /// Largest monotonicity drop observed against iterate `n − 1`.
    pub max_drop: f64,
    pub clamped_mass: f64,
    pub monitored: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub verdict: Verdict,
    pub records: Vec<IterationRecord>,
    pub blowup_threshold: f64,
    /// Last fully computed iterates.
    pub u: Trajectory,
    pub v: Trajectory,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.n)
    }
}

/// Per-iterate diagnostics evaluated on `(u_n, v_n)`.
pub type MonitorFn<'a> = dyn Fn(&Trajectory, &Trajectory) -> Result<Vec<f64>> + Sync + 'a;

/// Iterates until convergence, blow-up or `n_max`.
pub fn run_iteration(
    mu: &Field,
    nu: &Field,
    params: &SystemParams,
    schedule: &TimeSchedule,
    options: &IterationOptions,
    monitor: Option<&MonitorFn<'_>>,
) -> Result<IterationTrace> {
    options.validate()?;
    let ctx = IterationContext::new(*params, *schedule, mu.clone(), nu.clone(), options.heat_model)?;
    let threshold = options.blowup_factor * (1.0 + mu.max().max(nu.max()));
    let eval = |u: &Trajectory, v: &Trajectory| -> Result<Vec<f64>> {
        match monitor {
            Some(m) => m(u, v),
            None => Ok(Vec::new()),
        }
    };

    let (mut u, mut v) = ctx.initial();
    let mut records = vec![IterationRecord {
        n: 0,
        delta: 0.0,
        sup_u: u.sup_positive_times(),
        sup_v: v.sup_positive_times(),
        max_drop: 0.0,
        clamped_mass: 0.0,
        monitored: eval(&u, &v)?,
    }];
    if !(u.all_finite_below(threshold) && v.all_finite_below(threshold)) {
        return Ok(IterationTrace { verdict: Verdict::BlewUp, records, blowup_threshold: threshold, u, v });
    }

    for n in 1..=options.n_max {
        let (nu_, nv, clamped) = ctx.step(&u, &v);
        if !(nu_.all_finite_below(threshold) && nv.all_finite_below(threshold)) {
            records.push(IterationRecord {
                n,
                delta: f64::INFINITY,
                sup_u: nu_.sup_positive_times(),
                sup_v: nv.sup_positive_times(),
                max_drop: 0.0,
                clamped_mass: clamped,
                monitored: Vec::new(),
            });
            return Ok(IterationTrace { verdict: Verdict::BlewUp, records, blowup_threshold: threshold, u, v });
        }
        let scale = nu_.sup_positive_times().max(nv.sup_positive_times());
        let drop = nu_.max_drop_below(&u).max(nv.max_drop_below(&v));
        let tolerance = options.monotone_tol * scale;
        if drop > tolerance {
            return Err(Error::MonotonicityViolation { iteration: n, drop, tolerance });
        }
        let delta = nu_.sup_diff(&u) + nv.sup_diff(&v);
        records.push(IterationRecord {
            n,
            delta,
            sup_u: nu_.sup_positive_times(),
            sup_v: nv.sup_positive_times(),
            max_drop: drop,
            clamped_mass: clamped,
            monitored: eval(&nu_, &nv)?,
        });
        u = nu_;
        v = nv;
        if delta <= options.tol_converge * scale {
            return Ok(IterationTrace { verdict: Verdict::Converged, records, blowup_threshold: threshold, u, v });
        }
    }
    Ok(IterationTrace { verdict: Verdict::Inconclusive, records, blowup_threshold: threshold, u, v })
}

/// Data, parameters and horizon of the rescaled problem.
#[derive(Debug, Clone)]
pub struct ScaledProblem {
    pub mu: Field,
    pub nu: Field,
    pub params: SystemParams,
    pub horizon: f64,
}

/// `û(x,t) = T^{(p+1)/(pq−1)} u(k√T x, Tt)`, `v̂` with `(q+1)/(pq−1)`.
///
/// Densities are multiplied by `T^{(p+1)/(pq−1)}` and `T^{(q+1)/(pq−1)}`; the
/// grid is shrunk by `k√T`, so no resampling is involved. The horizon `T0`
/// of the original problem becomes `T0/T` and `D_i` becomes `D_i/k²`.
pub fn scale_transform(
    mu: &Field,
    nu: &Field,
    params: &SystemParams,
    horizon: f64,
    t: f64,
    k: f64,
) -> Result<ScaledProblem> {
    if !(t > 0.0 && t.is_finite() && k > 0.0 && k.is_finite()) {
        return invalid(format!("scale transform needs T > 0 and k > 0, got T = {t}, k = {k}"));
    }
    if mu.geometry() != nu.geometry() {
        return Err(Error::GeometryMismatch);
    }
    let (p, q) = (params.p, params.q);
    let a = (p + 1.0) / (p * q - 1.0);
    let b = (q + 1.0) / (p * q - 1.0);
    let half = mu.geometry().half_width() / (k * t.sqrt());
    let mu_hat = mu.with_half_width(half)?.scale(t.powf(a))?;
    let nu_hat = nu.with_half_width(half)?.scale(t.powf(b))?;
    let mut params_hat = *params;
    params_hat.d1 = params.d1 / (k * k);
    params_hat.d2 = params.d2 / (k * k);
    params_hat.validate()?;
    Ok(ScaledProblem { mu: mu_hat, nu: nu_hat, params: params_hat, horizon: horizon / t })
}

/// Inverse of [`scale_transform`] with the same `(T, k)`.
pub fn inverse_scale_transform(
    scaled: &ScaledProblem,
    t: f64,
    k: f64,
) -> Result<ScaledProblem> {
    scale_transform(&scaled.mu, &scaled.nu, &scaled.params, scaled.horizon, 1.0 / t, 1.0 / k)
}

/// The transform with `k = max(D1, D2)^{1/2}`, normalising `max D_i` to 1.
pub fn normalize_diffusivity(mu: &Field, nu: &Field, params: &SystemParams, horizon: f64) -> Result<ScaledProblem> {
    scale_transform(mu, nu, params, horizon, 1.0, params.max_diffusivity().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::heat_apply;

    fn geom1(m: usize) -> GridGeometry {
        GridGeometry::new(1, 4.0, m).unwrap()
    }

    #[test]
    fn exponents_case_a() {
        let s = SystemParams::new(2, 2.0, 3.0, 1.0, 1.0).unwrap();
        let e = s.exponents();
        assert!((e.r1_star - 5.0 / 3.0).abs() < 1e-15);
        assert!((e.r2_star - 1.25).abs() < 1e-15);
        assert!((e.beta_a - 1.25).abs() < 1e-15);
        assert!((e.alpha_a - 5.0 / 3.0).abs() < 1e-15);
        assert!((e.alpha_a / e.beta_a * e.r2_star - e.r1_star).abs() < 1e-12);
        assert!(s.check_case_a().is_ok());
        assert!(s.with_beta_a(0.9).is_err());
        assert!(s.with_beta_a(1.2).is_ok());
        assert!(SystemParams::new(1, 0.5, 1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1, 3.0, 2.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1, 3.0, 3.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn graded_schedule() {
        let s = TimeSchedule::new(1.0, 4, 2.0).unwrap();
        assert_eq!(s.times(), vec![0.0, 1.0 / 16.0, 0.25, 9.0 / 16.0, 1.0]);
        assert!(TimeSchedule::new(1.0, 4, 0.5).is_err());
    }

    #[test]
    fn zero_forcing_is_free_evolution() {
        let g = geom1(64);
        let mu = Field::from_fn(g, |x| (-x[0] * x[0]).exp()).unwrap();
        let nu = Field::zeros(g);
        let params = SystemParams::new(1, 2.0, 2.0, 0.5, 1.0).unwrap();
        let sched = TimeSchedule::new(0.5, 16, 2.0).unwrap();
        let ctx = IterationContext::new(params, sched, mu.clone(), nu.clone(), HeatModel::Spectral).unwrap();
        let (u0, v0) = ctx.initial();
        let (u1, _, _) = ctx.step(&u0, &v0);
        assert_eq!(u0, u1);
        for (t, f) in u0.times.iter().zip(&u0.fields).skip(1) {
            let direct = heat_apply(&mu, 0.5, *t).unwrap().field;
            assert!(f.max_abs_diff(&direct).unwrap() < 1e-13);
        }
    }

    #[test]
    fn zero_data_converges_at_one() {
        let g = geom1(32);
        let z = Field::zeros(g);
        let params = SystemParams::new(1, 2.0, 2.0, 1.0, 1.0).unwrap();
        let sched = TimeSchedule::new(1.0, 8, 2.0).unwrap();
        let tr = run_iteration(&z, &z, &params, &sched, &IterationOptions::default(), None).unwrap();
        assert_eq!(tr.verdict, Verdict::Converged);
        assert_eq!(tr.iterations(), 1);
        assert!(tr.u.fields.iter().all(|f| f.max() == 0.0));
    }

    #[test]
    fn constant_data_one_step() {
        let g = geom1(32);
        let c = 0.5;
        let mu = Field::constant(g, c).unwrap();
        let params = SystemParams::new(1, 2.0, 2.0, 1.0, 1.0).unwrap();
        let sched = TimeSchedule::new(0.4, 32, 2.0).unwrap();
        let ctx = IterationContext::new(params, sched, mu.clone(), mu.clone(), HeatModel::Lattice).unwrap();
        let (u0, v0) = ctx.initial();
        let (u1, _, _) = ctx.step(&u0, &v0);
        for (t, f) in u1.times.iter().zip(&u1.fields) {
            let expect = c + c * c * t;
            assert!(f.values().iter().all(|x| (x - expect).abs() <= 1e-6 * expect));
        }
    }

    #[test]
    fn iterates_are_monotone_and_small_data_converges() {
        let g = GridGeometry::new(1, 4.0, 128).unwrap();
        let mu = Field::from_fn(g, |x| 0.2 * (-4.0 * x[0] * x[0]).exp()).unwrap();
        let params = SystemParams::new(1, 2.0, 3.0, 1.0, 0.5).unwrap();
        let sched = TimeSchedule::new(1.0, 32, 2.0).unwrap();
        let tr = run_iteration(&mu, &mu, &params, &sched, &IterationOptions::default(), None).unwrap();
        assert_eq!(tr.verdict, Verdict::Converged);
        assert!(tr.records.windows(2).all(|w| w[1].sup_u >= w[0].sup_u));
        let big = mu.scale(200.0).unwrap();
        let tr = run_iteration(&big, &big, &params, &sched, &IterationOptions::default(), None).unwrap();
        assert_eq!(tr.verdict, Verdict::BlewUp);
    }

    #[test]
    fn scale_transform_identity_and_round_trip() {
        let g = geom1(64);
        let mu = Field::from_fn(g, |x| (-x[0] * x[0]).exp()).unwrap();
        let nu = Field::from_fn(g, |x| 1.0 / (1.0 + x[0] * x[0])).unwrap();
        let params = SystemParams::new(1, 2.0, 3.0, 4.0, 1.0).unwrap();
        let id = scale_transform(&mu, &nu, &params, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(id.mu, mu);
        assert_eq!(id.params, params);
        let norm = normalize_diffusivity(&mu, &nu, &params, 1.0).unwrap();
        assert_eq!((norm.params.d1, norm.params.d2), (1.0, 0.25));
        let s = scale_transform(&mu, &nu, &params, 1.0, 0.3, 1.7).unwrap();
        assert!((s.horizon - 1.0 / 0.3).abs() < 1e-12);
        let back = inverse_scale_transform(&s, 0.3, 1.7).unwrap();
        assert!((back.mu.geometry().half_width() - 4.0).abs() < 1e-12);
        assert!(back.mu.values().iter().zip(mu.values()).all(|(a, b)| (a - b).abs() < 1e-8));
        assert!(back.nu.values().iter().zip(nu.values()).all(|(a, b)| (a - b).abs() < 1e-8));
        assert_eq!(back.params.case(), params.case());
    }

    #[test]
    fn scaled_iteration_commutes() {
        // solving the rescaled problem on (0, 1) reproduces u(·, T) up to the value factor
        let g = GridGeometry::new(1, 4.0, 64).unwrap();
        let mu = Field::from_fn(g, |x| 0.3 * (-x[0] * x[0]).exp()).unwrap();
        let params = SystemParams::new(1, 2.0, 2.0, 1.0, 1.0).unwrap();
        let t = 0.5;
        let opts = IterationOptions::default();
        let tr = run_iteration(&mu, &mu, &params, &TimeSchedule::new(t, 16, 2.0).unwrap(), &opts, None).unwrap();
        let s = scale_transform(&mu, &mu, &params, t, t, 1.0).unwrap();
        let sched = TimeSchedule::new(s.horizon, 16, 2.0).unwrap();
        let trs = run_iteration(&s.mu, &s.nu, &s.params, &sched, &opts, None).unwrap();
        let factor = t.powf(3.0 / 3.0);
        for (a, b) in tr.u.last().values().iter().zip(trs.u.last().values()) {
            assert!((a * factor - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }
}
