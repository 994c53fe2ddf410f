//! Seeded property suites run by `verify`. Each check reports a measured
//! `value` that passes when `value ≤ threshold`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::default_experiment_suite;
use crate::data::{make_data, Case};
use crate::error::{invalid, Error, Result};
use crate::field::{sample_radial, Field, GridGeometry, PowerLogProfile};
use crate::heat::{
    diffusivity_comparison_check, direct_quadrature_oracle, heat_apply, kernel_rearrangement_error,
    kernel_weighted_integral_check, HeatModel, Propagator,
};
use crate::norms::{
    lemma_integral_bounds_check, log_grid, morrey_norm, primed_of_profile, strong_of_profile, uniformly_local_norm,
    weak_of_profile, NormSpec,
};
use crate::phi::{phi_axiom_report, Phi};
use crate::rearrangement::{
    convolve_rearranged_bound_check, distribution_function, product_bound_check, rearrange, InequalityReport, StepProfile,
};
use crate::supersolution::check_supersolution;
use crate::system::{run_iteration, IterationOptions, SystemParams, TimeSchedule};
use crate::verify::decay::{dyadic_times, fit_morrey_smoothing, fit_semigroup_decay, DecayFit, FitOptions};
use crate::verify::ode::constant_data_ode_check;
use crate::verify::phi_asym::{phi_asymptotics_report, AsymptoticsOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Rearrangement,
    Inequalities,
    Semigroup,
    Decay,
    Phi,
    Iteration,
    Supersolution,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Rearrangement,
        Suite::Inequalities,
        Suite::Semigroup,
        Suite::Decay,
        Suite::Phi,
        Suite::Iteration,
        Suite::Supersolution,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Rearrangement => "rearrangement",
            Suite::Inequalities => "inequalities",
            Suite::Semigroup => "semigroup",
            Suite::Decay => "decay",
            Suite::Phi => "phi",
            Suite::Iteration => "iteration",
            Suite::Supersolution => "supersolution",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::InvalidParameter(format!("unknown suite `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub evaluations: usize,
    pub value: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn new(name: &str, evaluations: usize, value: f64, threshold: f64) -> Self {
        Self { name: name.to_string(), passed: value <= threshold, evaluations, value, threshold, note: None }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn require(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            evaluations: 0,
            value: f64::INFINITY,
            threshold: 0.0,
            note: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn suite(&self, suite: Suite) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == suite)
    }
}

/// Largest `|a − b| / scale` (or one-sided excess) over a run of comparisons.
#[derive(Default)]
struct Agg {
    evaluations: usize,
    worst: f64,
}

impl Agg {
    fn equal(&mut self, a: f64, b: f64, scale: f64) {
        self.evaluations += 1;
        let e = if a == b { 0.0 } else { (a - b).abs() / scale.max(f64::MIN_POSITIVE) };
        self.worst = self.worst.max(if e.is_nan() { f64::INFINITY } else { e });
    }

    /// Records the violation of `lhs ≤ rhs` relative to `scale`.
    fn below(&mut self, lhs: f64, rhs: f64, scale: f64) {
        self.evaluations += 1;
        let e = (lhs - rhs).max(0.0) / scale.max(f64::MIN_POSITIVE);
        self.worst = self.worst.max(if e.is_nan() { f64::INFINITY } else { e });
    }

    fn merge(&mut self, r: &InequalityReport) {
        self.evaluations += r.evaluations;
        self.worst = self.worst.max(if r.max_violation.is_finite() { r.relative_violation() } else { f64::INFINITY });
    }

    fn result(&self, name: &str, threshold: f64) -> CheckResult {
        CheckResult::new(name, self.evaluations, self.worst, threshold)
    }
}

fn rng_for(seed: u64, suite: Suite) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(suite as u64 + 1)))
}

/// Non-negative field with zeros, ties and a random overall scale.
fn random_field(rng: &mut ChaCha8Rng, g: GridGeometry) -> Field {
    let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
    let zeros = rng.gen_range(0.0..0.5);
    let values = (0..g.len())
        .map(|_| {
            if rng.gen_bool(zeros) {
                0.0
            } else if rng.gen_bool(0.5) {
                scale * rng.gen_range(1usize..=4) as f64 * 0.25
            } else {
                scale * rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    Field::new(g, values).expect("non-negative samples")
}

fn profile_fields() -> Vec<Field> {
    let g1 = GridGeometry::new(1, 4.0, 256).expect("geometry");
    let g2 = GridGeometry::new(2, 4.0, 32).expect("geometry");
    let shapes = [
        PowerLogProfile::indicator(1.0),
        PowerLogProfile::indicator(2.5),
        PowerLogProfile::power(1.0, 0.3, 2.0),
        PowerLogProfile::power(2.0, 0.5, 1.0),
        PowerLogProfile::power(1.0, 0.9, 3.0),
        PowerLogProfile::power(1.0, 1.0, 1.0).with_log(1.5),
        PowerLogProfile::power(0.5, 0.5, 2.0).with_log(0.5),
        PowerLogProfile::power(1.0, 0.0, 1.0).with_log(-1.0),
        PowerLogProfile::power(3.0, 0.2, 4.0).with_log(1.0).with_iterated_log(1.0),
        PowerLogProfile::power(1.0, 0.7, 1.5).with_iterated_log(2.0),
    ];
    let mut out = Vec::new();
    for g in [g1, g2] {
        for s in &shapes {
            out.push(sample_radial(&g, s).expect("profile samples"));
        }
    }
    out
}

/// Midpoints of the merged step intervals plus one point past both supports.
fn probe_points(a: &StepProfile, b: &StepProfile) -> Vec<f64> {
    let mut ends: Vec<f64> = a.ends().iter().chain(b.ends()).copied().collect();
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    let mut out = Vec::with_capacity(ends.len() + 1);
    let mut left = 0.0;
    for &e in &ends {
        out.push(0.5 * (left + e));
        left = e;
    }
    out.push(left + 1.0);
    out
}

fn phi_for(i: usize) -> Phi {
    match i % 3 {
        0 => Phi::log(1.0),
        1 => Phi::Identity,
        _ => Phi::log(2.0),
    }
}

// ---------------------------------------------------------------- suites

fn rearrangement_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = rng_for(seed, Suite::Rearrangement);
    let g = GridGeometry::new(1, 4.0, 256)?;
    let mut fields: Vec<Field> = (0..200).map(|_| random_field(&mut rng, g)).collect();
    fields.extend(profile_fields());
    let (mut homog, mut power, mut lr, mut maximal, mut distribution) =
        (Agg::default(), Agg::default(), Agg::default(), Agg::default(), Agg::default());
    for f in &fields {
        let p = rearrange(f);
        let scale = p.max_level();
        let k = rng.gen_range(0.01..100.0);
        let pk = rearrange(&f.scale(k)?);
        for s in probe_points(&p, &pk) {
            homog.equal(pk.f_star(s), k * p.f_star(s), k * scale);
        }
        let q = rng.gen_range(0.2..5.0);
        let pq = rearrange(&f.pointwise_power(q));
        let ppow = p.power(q);
        for s in probe_points(&pq, &ppow) {
            power.equal(pq.f_star(s), ppow.f_star(s), scale.powf(q));
        }
        for r in [1.0, 1.5, 2.0, 3.7, f64::INFINITY] {
            let a = p.lr_norm(r);
            let b = f.lp_norm(r);
            lr.equal(a, b, a.max(b));
        }
        let mut grid = probe_points(&p, &p);
        grid.extend_from_slice(p.ends());
        for s in grid {
            maximal.below(p.f_star(s), p.f_star_star(s)?, scale);
        }
        for &lambda in p.levels().iter().step_by(7) {
            let count = p.levels().iter().take_while(|v| **v > lambda).count();
            let expect = if count == 0 { 0.0 } else { p.ends()[count - 1] };
            let direct = distribution_function(f, lambda)?;
            distribution.equal(direct, expect, p.total_measure());
        }
    }
    Ok(vec![
        homog.result("homogeneity", 1e-12).with_note("(k f)* = k f*"),
        power.result("power_commutes", 1e-12).with_note("(|f|^q)* = (f*)^q"),
        lr.result("lr_norm_equimeasurable", 1e-12),
        maximal.result("maximal_dominates", 1e-12).with_note("f** ≥ f*"),
        distribution.result("distribution_function", 1e-12),
    ])
}

fn inequality_fields(rng: &mut ChaCha8Rng, i: usize) -> (Field, Field) {
    let g = if i % 4 == 3 {
        GridGeometry::new(2, 2.0, 16).expect("geometry")
    } else {
        GridGeometry::new(1, 4.0, 128).expect("geometry")
    };
    (random_field(rng, g), random_field(rng, g))
}

fn inequalities_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = rng_for(seed, Suite::Inequalities);
    let names = [
        "oneil_convolution",
        "product_rearrangement",
        "holder_product",
        "holder_product_windowed",
        "power_identity_weak",
        "power_identity_strong",
        "power_identity_windowed",
        "morrey_monotone",
        "morrey_power",
        "weak_le_strong",
        "primed_le_strong",
        "weak_le_primed",
        "primed_le_conjugate_weak",
    ];
    let mut aggs: Vec<Agg> = names.iter().map(|_| Agg::default()).collect();
    for i in 0..100 {
        let (f1, f2) = inequality_fields(&mut rng, i);
        let phi = phi_for(i);
        let (p1, p2) = (rearrange(&f1), rearrange(&f2));
        aggs[0].merge(&convolve_rearranged_bound_check(&f1, &f2, None)?);
        aggs[1].merge(&product_bound_check(&f1, &f2, None)?);

        // Hölder-type product bound with α = α1/r + α2/r'
        let r = rng.gen_range(1.05..4.0);
        let rc = r / (r - 1.0);
        let (a1, a2) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        let alpha = a1 / r + a2 / rc;
        let prod = f1.mul(&f2)?;
        let lhs = strong_of_profile(&rearrange(&prod), 1.0, alpha, &phi);
        let rhs = strong_of_profile(&p1, r, a1, &phi) * strong_of_profile(&p2, rc, a2, &phi);
        aggs[2].below(lhs, rhs, lhs.max(rhs));
        let radius = 0.5 * f1.geometry().half_width();
        let ul = |f: &Field, r: f64, a: f64| uniformly_local_norm(f, &NormSpec::strong(r, a, phi.clone()).windowed(radius), 1);
        let lhs = ul(&prod, 1.0, alpha)?;
        let rhs = ul(&f1, r, a1)? * ul(&f2, rc, a2)?;
        aggs[3].below(lhs, rhs, lhs.max(rhs));

        // ‖|f|^k‖_{r,α} = ‖f‖_{kr,α}^k
        let r = rng.gen_range(1.0..3.0);
        let k = rng.gen_range(1.0 / r..3.0);
        let a = rng.gen_range(0.0..2.0);
        let fk = f1.pointwise_power(k);
        let pk = rearrange(&fk);
        let (x, y) = (weak_of_profile(&pk, r, a, &phi), weak_of_profile(&p1, k * r, a, &phi).powf(k));
        aggs[4].equal(x, y, x.max(y));
        let (x, y) = (strong_of_profile(&pk, r, a, &phi), strong_of_profile(&p1, k * r, a, &phi).powf(k));
        aggs[5].equal(x, y, x.max(y));
        let spec = |r: f64| NormSpec::strong(r, a, phi.clone()).windowed(radius);
        let (x, y) = (uniformly_local_norm(&fk, &spec(r), 1)?, uniformly_local_norm(&f1, &spec(k * r), 1)?.powf(k));
        aggs[6].equal(x, y, x.max(y));

        // Morrey: monotone in α, and ‖f^k‖_{M(r,α)} = ‖f‖_{M(kr,kα)}^k
        let r = rng.gen_range(1.5..6.0);
        let (lo, hi): (f64, f64) = (rng.gen_range(1.0..r), rng.gen_range(1.0..r));
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let (x, y) = (morrey_norm(&f1, r, lo, radius)?, morrey_norm(&f1, r, hi, radius)?);
        aggs[7].below(x, y, x.max(y));
        let k = rng.gen_range(1.0..2.5);
        let (x, y) = (morrey_norm(&f1.pointwise_power(k), r, lo, radius)?, morrey_norm(&f1, k * r, k * lo, radius)?.powf(k));
        aggs[8].equal(x, y, x.max(y));

        // weak ≤ strong, primed ≤ strong, weak ≤ primed ≤ r' weak
        let r = rng.gen_range(1.05..5.0);
        let a = rng.gen_range(0.0..3.0);
        let w = weak_of_profile(&p2, r, a, &phi);
        let s = strong_of_profile(&p2, r, a, &phi);
        let pr = primed_of_profile(&p2, r, a, &phi);
        aggs[9].below(w, s, s);
        aggs[10].below(pr, s, s);
        aggs[11].below(w, pr, pr);
        aggs[12].below(pr, r / (r - 1.0) * w, pr);
    }
    Ok(names.iter().zip(&aggs).map(|(n, a)| a.result(n, 1e-10)).collect())
}

/// Error ratio at which one refinement counts as halving: observed order ≥ 0.99.
const HALVING_RATIO: f64 = 0.503_477_9;

fn semigroup_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = rng_for(seed, Suite::Semigroup);
    let mut out = Vec::new();

    // spectral multiplier against the dense periodized-kernel sum
    let mut oracle = Agg::default();
    let mut semigroup = Agg::default();
    let mut lattice = Agg::default();
    for i in 0..50 {
        let g = GridGeometry::new(1 + i % 2, 2.0, 32)?;
        let f = random_field(&mut rng, g);
        let h2 = g.spacing().powi(2);
        let d = rng.gen_range(0.5..2.0);
        let dt = 10.0 * h2 * (rng.gen_range(0.0..1.0) * (1.0 / (10.0 * h2)).ln()).exp();
        let t = dt / d;
        let a = heat_apply(&f, d, t)?.field;
        let b = direct_quadrature_oracle(&f, d, t)?;
        oracle.evaluations += 1;
        oracle.worst = oracle.worst.max(a.max_abs_diff(&b)? / f.max().max(f64::MIN_POSITIVE));

        let (t1, t2) = (dt * rng.gen_range(0.2..0.8), dt * rng.gen_range(0.2..0.8));
        for (model, agg, resolved) in [(HeatModel::Spectral, &mut semigroup, true), (HeatModel::Lattice, &mut lattice, false)] {
            let prop = Propagator::with_model(&g, model);
            let (s1, s2) = if resolved { (t1, t2) } else { (t1 * 1e-3, t2) };
            let (x, _) = prop.apply(f.values(), s1);
            let (x, _) = prop.apply(&x, s2);
            let (y, _) = prop.apply(f.values(), s1 + s2);
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            agg.evaluations += 1;
            agg.worst = agg.worst.max(err / f.max().max(f64::MIN_POSITIVE));
        }
    }
    out.push(oracle.result("oracle_equivalence", 1e-10).with_note("D t ∈ [10 h², 1], L = 2, M = 32"));
    out.push(semigroup.result("semigroup_identity", 1e-12));
    out.push(lattice.result("semigroup_identity_lattice", 1e-12).with_note("includes t1 < h²"));

    // sampled kernel vs its closed-form rearrangement
    for (n, m) in [(1usize, 512usize), (2, 256)] {
        for t in [0.01, 0.1] {
            let coarse = kernel_rearrangement_error(&GridGeometry::new(n, 2.0, m)?, 1.0, t)?;
            let fine = kernel_rearrangement_error(&GridGeometry::new(n, 2.0, 2 * m)?, 1.0, t)?;
            let ratio = fine / coarse;
            out.push(
                CheckResult::new(&format!("kernel_rearrangement_N{n}_t{t}"), 2, coarse, 0.02)
                    .require(ratio <= HALVING_RATIO)
                    .with_note(format!("M = {m}: {coarse:.4e}; M = {}: {fine:.4e}; ratio {ratio:.4}", 2 * m)),
            );
        }
    }

    let mut cmp = Agg::default();
    for (d1, d2) in [(1.0, 0.5), (0.25, 1.0), (1.0, 1.0)] {
        for t in [0.01, 0.1, 1.0] {
            let g = GridGeometry::new(2, 4.0, 32)?;
            let rep = diffusivity_comparison_check(&g, d1, d2, t)?;
            cmp.evaluations += 1;
            cmp.worst = cmp.worst.max(rep.max_excess.max(0.0));
        }
    }
    out.push(cmp.result("diffusivity_comparison", 1e-12));
    Ok(out)
}

fn decay_check(name: &str, fit: Result<DecayFit>, slope_required: bool) -> CheckResult {
    match fit {
        Err(e) => CheckResult::failed(name, &e),
        Ok(fit) => {
            let note = format!(
                "slope {:.4} (effective prediction {:.4}), compensated ratio {:.4}, R² {:.5}, outcome {:?}",
                fit.slope, fit.effective_predicted_slope, fit.compensated_ratio, fit.r_squared, fit.outcome
            );
            if slope_required {
                let rel = (fit.slope - fit.effective_predicted_slope).abs() / fit.effective_predicted_slope.abs();
                CheckResult::new(name, fit.times.len(), rel, FitOptions::default().slope_tolerance)
                    .require(fit.r_squared >= FitOptions::default().min_r_squared)
                    .with_note(note)
            } else {
                CheckResult::new(name, fit.times.len(), fit.compensated_ratio, FitOptions::default().ratio_band)
                    .with_note(note)
            }
        }
    }
}

fn decade_grid(t0: f64) -> Vec<f64> {
    (0..=12).map(|k| t0 * 10f64.powf(k as f64 / 4.0)).collect()
}

fn decay_suite(_seed: u64) -> Result<Vec<CheckResult>> {
    let opts = FitOptions::default();
    let linf = NormSpec::weak(f64::INFINITY, 0.0, Phi::Identity);
    let l1 = NormSpec::strong(1.0, 0.0, Phi::Identity).windowed(1.0);
    let mut out = Vec::new();

    let g = GridGeometry::new(1, 8.0, 4096)?;
    let dirac = Field::point_mass(g, g.origin_index(), 1.0)?;
    out.push(decay_check("dirac_slope_N1", fit_semigroup_decay(&dirac, &l1, &linf, 1.0, &dyadic_times(1, 12), &opts), true));

    let g = GridGeometry::new(2, 8.0, 2048)?;
    let dirac = Field::point_mass(g, g.origin_index(), 1.0)?;
    out.push(decay_check("dirac_slope_N2", fit_semigroup_decay(&dirac, &l1, &linf, 1.0, &decade_grid(6.25e-4), &opts), true));

    // case-C profile: t^{N/2} log(e+1/t)^{N/2} ‖S(t)φ‖_∞ on [1e-4, 1e-1]
    let params = SystemParams::new(1, 3.0, 3.0, 1.0, 1.0)?;
    let g = GridGeometry::new(1, 8.0, 8192)?;
    let mu = make_data(&crate::data::DataFamily::new(Case::C, 1.0, 1.0), &params, &g)?.mu;
    let log = Phi::log(1.0);
    let source = NormSpec::strong(1.0, 0.5, log.clone()).windowed(1.0);
    let target = NormSpec::weak(f64::INFINITY, 0.0, log);
    out.push(decay_check("case_c_compensated", fit_semigroup_decay(&mu, &source, &target, 1.0, &decade_grid(1e-4), &opts), false));

    // case-A μ with r1 = r1*, r2 = ∞: t^{N/(2 r1*)} ‖S(t)μ‖_∞
    let params = SystemParams::new(1, 4.0, 4.0, 1.0, 1.0)?;
    let r1 = params.check_case_a()?.r1_star;
    let g = GridGeometry::new(1, 8.0, 16384)?;
    let mu = make_data(&crate::data::DataFamily::new(Case::A, 1.0, 1.0), &params, &g)?.mu;
    out.push(decay_check(
        "case_a_morrey_compensated",
        fit_morrey_smoothing(&mu, r1, f64::INFINITY, 1.0, 1.0, 1.0, &decade_grid(1e-4), &opts),
        false,
    ));
    Ok(out)
}

fn phi_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = rng_for(seed, Suite::Phi);
    let mut out = Vec::new();
    let builtins = [("identity", Phi::Identity), ("log1", Phi::log(1.0)), ("log2", Phi::log(2.0))];
    for (tag, phi) in &builtins {
        let ax = phi_axiom_report(phi)?;
        out.push(CheckResult::new(&format!("axioms_{tag}"), 1, ax.phi2_constant, f64::INFINITY).require(ax.passed));
        let rep = phi_asymptotics_report(phi, &AsymptoticsOptions::default());
        let spread = rep
            .comparability
            .iter()
            .map(|c| c.max_ratio / c.min_ratio)
            .fold(1.0, f64::max);
        let constants_finite = rep
            .monotone
            .iter()
            .all(|m| m.increasing_constant.is_finite() && m.decreasing_constant.is_finite());
        out.push(
            CheckResult::new(&format!("comparability_{tag}"), rep.comparability.len(), spread, f64::INFINITY)
                .require(rep.all_bounded && constants_finite),
        );
        if *tag != "log2" {
            let opts = AsymptoticsOptions { monotone_pairs: vec![(0.5, 1.0)], ..Default::default() };
            let rep = phi_asymptotics_report(phi, &opts);
            out.push(
                CheckResult::new(&format!("monotone_half_{tag}"), rep.monotone[0].pairs, rep.violations as f64, 0.0)
                    .with_note("δ = 1/2, α = 1, C = 1"),
            );
        }
    }

    let s_grid = log_grid(1e-8, 1e4, 2);
    let log = Phi::log(1.0);
    let mut worst = 1.0f64;
    let mut ok = true;
    let mut count = 0;
    for (q, a) in [(0.0, 1.0), (1.0, -1.0), (-0.5, 2.0), (-2.0, 1.0), (-3.0, -2.0), (2.0, 0.5)] {
        let rep = lemma_integral_bounds_check(&log, q, a, &s_grid)?;
        ok &= rep.bounded;
        worst = worst.max(rep.max_ratio);
        count += rep.s.len();
    }
    out.push(CheckResult::new("integral_bounds", count, worst, f64::INFINITY).require(ok));

    // small t, where Φ(1/t) drives the rate; large t is a pure power law
    let t_grid = log_grid(1e-10, 1e-2, 2);
    let mut worst = 1.0f64;
    let mut ok = true;
    for (n, r, q, gamma) in [(1, 1.0, 2.0, 0.5), (1, 1.5, 3.0, 1.0), (2, 2.0, 2.0, -1.0), (2, 1.0, 1.0, 2.0)] {
        let rep = kernel_weighted_integral_check(n, 1.0, Some(&t_grid), r, q, gamma, &log)?;
        ok &= rep.bounded;
        worst = worst.max(rep.max_ratio);
    }
    out.push(CheckResult::new("kernel_weighted_integrals", 4, worst, f64::INFINITY).require(ok));

    // exponent table: αA/βA · r2* = r1* in case A, δ_DE > 0 in cases D and E
    let mut ident = Agg::default();
    let mut min_delta = f64::INFINITY;
    let mut de = 0;
    let mut draws = 0;
    while (ident.evaluations < 100 || de < 100) && draws < 100_000 {
        draws += 1;
        let n = rng.gen_range(1usize..=3);
        let q: f64 = rng.gen_range(1.05..8.0);
        let p = if rng.gen_bool(0.2) { q } else { rng.gen_range((1.0 / q + 1e-3).min(q)..=q) };
        let q = if rng.gen_bool(0.15) { 1.0 + 2.0 / n as f64 } else { q };
        let Ok(params) = SystemParams::new(n, p.min(q), q, 1.0, 1.0) else { continue };
        let e = params.exponents();
        match params.case().case {
            Case::A if ident.evaluations < 100 => {
                if let Ok(e) = params.check_case_a() {
                    ident.equal(e.alpha_a / e.beta_a * e.r2_star, e.r1_star, e.r1_star);
                }
            }
            Case::D | Case::E if de < 100 => {
                de += 1;
                min_delta = min_delta.min(e.delta_de);
            }
            _ => {}
        }
    }
    out.push(ident.result("exponent_identity_case_a", 1e-12));
    out.push(
        CheckResult::new("delta_de_positive", de, -min_delta, 0.0)
            .require(min_delta > 0.0 && de > 0)
            .with_note(format!("min δ_DE = {min_delta:.6}")),
    );
    Ok(out)
}

fn iteration_suite(_seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, cfg) in default_experiment_suite() {
        let check = format!("monotone_{name}");
        let run = || -> Result<CheckResult> {
            let g = cfg.geometry.build()?;
            let data = make_data(&cfg.data, &cfg.params, &g)?;
            let opts = cfg.run.iteration();
            let trace = run_iteration(&data.mu, &data.nu, &cfg.params, &cfg.schedule, &opts, None)?;
            let scale = trace.records.iter().map(|r| r.sup_u.max(r.sup_v)).filter(|x| x.is_finite()).fold(0.0, f64::max);
            let drop = trace.records.iter().map(|r| r.max_drop).fold(0.0, f64::max);
            Ok(CheckResult::new(&check, trace.records.len(), drop / scale.max(f64::MIN_POSITIVE), opts.monotone_tol)
                .with_note(format!("verdict {} after {} iterations", trace.verdict, trace.iterations())))
        };
        out.push(run().unwrap_or_else(|e| CheckResult::failed(&check, &e)));
    }
    let opts = IterationOptions { n_max: 80, ..Default::default() };
    for (p, q) in [(2.0, 2.0), (2.0, 3.0)] {
        let name = format!("constant_data_ode_p{p}_q{q}");
        let params = SystemParams::new(1, p, q, 1.0, 1.0)?;
        out.push(match constant_data_ode_check(&params, 1.0, 1.0, 2.0, 20_000, &opts) {
            Ok(c) => CheckResult::new(&name, 2, c.relative_error, 1e-4)
                .require(c.verdict == crate::system::Verdict::Converged)
                .with_note(format!("T = {:.5}, {} iterations", c.horizon, c.iterations)),
            Err(e) => CheckResult::failed(&name, &e),
        });
    }
    Ok(out)
}

fn supersolution_suite(_seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, cfg) in default_experiment_suite() {
        if !matches!(cfg.data.case, Case::A | Case::F) || !name.ends_with("_small") {
            continue;
        }
        let check = format!("supersolution_{name}");
        let run = || -> Result<CheckResult> {
            let g = cfg.geometry.build()?;
            let data = make_data(&cfg.data, &cfg.params, &g)?;
            let rep = check_supersolution(&data.mu, &data.nu, &cfg.params, &cfg.schedule, &cfg.run.iteration())?;
            let worst = (-rep.margin_u).max(-rep.margin_v).max(rep.iterate_excess);
            Ok(CheckResult::new(&check, 1, worst, crate::supersolution::MARGIN_TOLERANCE)
                .require(rep.holds)
                .with_note(format!(
                    "margins {:.3e} / {:.3e}, semigroup check {:.3e}",
                    rep.margin_u, rep.margin_v, rep.semigroup_check
                )))
        };
        out.push(run().unwrap_or_else(|e| CheckResult::failed(&check, &e)));
    }
    // a deliberately small horizon for case F with a larger ν
    let mut cfg = crate::config::ExperimentConfig::default_for_case(Case::F, 0.02);
    cfg.schedule = TimeSchedule::new(0.02, 16, 2.0)?;
    let g = cfg.geometry.build()?;
    let data = make_data(&cfg.data.clone().with_nu(2.0, crate::data::NuShape::Ball), &cfg.params, &g)?;
    out.push(match check_supersolution(&data.mu, &data.nu, &cfg.params, &cfg.schedule, &cfg.run.iteration()) {
        Ok(rep) => CheckResult::new(
            "supersolution_case_f_short",
            1,
            (-rep.margin_u).max(-rep.margin_v).max(rep.iterate_excess),
            crate::supersolution::MARGIN_TOLERANCE,
        )
        .require(rep.holds),
        Err(e) => CheckResult::failed("supersolution_case_f_short", &e),
    });
    Ok(out)
}

/// Runs one suite. Errors inside a suite become failed checks.
pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let result = match suite {
        Suite::Rearrangement => rearrangement_suite(seed),
        Suite::Inequalities => inequalities_suite(seed),
        Suite::Semigroup => semigroup_suite(seed),
        Suite::Decay => decay_suite(seed),
        Suite::Phi => phi_suite(seed),
        Suite::Iteration => iteration_suite(seed),
        Suite::Supersolution => supersolution_suite(seed),
    };
    let checks = result.unwrap_or_else(|e| vec![CheckResult::failed("suite_setup", &e)]);
    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    SuiteReport { suite, passed, checks }
}

/// Runs the listed suites in order; the list must be non-empty.
pub fn run_verify(suites: &[Suite], seed: u64) -> Result<VerifyReport> {
    if suites.is_empty() {
        return invalid("no suites selected");
    }
    let reports: Vec<SuiteReport> = suites.iter().map(|s| run_suite(*s, seed)).collect();
    let passed = reports.iter().all(|r| r.passed);
    Ok(VerifyReport { seed, passed, suites: reports })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
        assert!(run_verify(&[], 0).is_err());
    }

    #[test]
    fn rearrangement_suite_passes() {
        let rep = run_suite(Suite::Rearrangement, 7);
        assert!(rep.passed, "{:#?}", rep.checks);
    }

    #[test]
    fn phi_suite_passes() {
        let rep = run_suite(Suite::Phi, 7);
        assert!(rep.passed, "{:#?}", rep.checks);
    }
}
