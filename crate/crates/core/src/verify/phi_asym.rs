//! Sampled comparability `Φ(a+k) ≍ Φ(ka) ≍ Φ(a^k) ≍ Φ(a)` and the
//! almost-monotone bounds for `τ^{±δ} Φ(1/τ)^α`.

use serde::Serialize;

use crate::norms::log_grid;
use crate::phi::{Phi, PHI_ARG_CAP};

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsOptions {
    pub k_grid: Vec<f64>,
    pub a_grid: Vec<f64>,
    /// `(δ, α)` pairs for the monotone bounds.
    pub monotone_pairs: Vec<(f64, f64)>,
    pub tau_grid: Vec<f64>,
    /// Constant `C` against which monotone-bound violations are counted.
    pub claimed_constant: f64,
}

impl Default for AsymptoticsOptions {
    fn default() -> Self {
        Self {
            k_grid: vec![0.5, 2.0, 3.0],
            a_grid: log_grid(1e-6, 1e30, 2),
            monotone_pairs: vec![(0.5, 1.0), (0.1, 2.0), (1.0, -1.0)],
            tau_grid: log_grid(1e-12, 1e6, 4),
            claimed_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparabilityEntry {
    /// `shift` (`Φ(a+k)`), `scale` (`Φ(ka)`) or `power` (`Φ(a^k)`), each over `Φ(a)`.
    pub kind: String,
    pub k: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// No drift over the last decade of `a` beyond 50% of the interior range.
    pub bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneEntry {
    pub delta: f64,
    pub alpha: f64,
    /// `sup τ1^δ Φ(1/τ1)^α / (τ2^δ Φ(1/τ2)^α)` over `τ1 ≤ τ2`.
    pub increasing_constant: f64,
    /// `sup τ2^{−δ} Φ(1/τ2)^α / (τ1^{−δ} Φ(1/τ1)^α)` over `τ1 ≤ τ2`.
    pub decreasing_constant: f64,
    pub pairs: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiAsymptoticsReport {
    pub phi: String,
    pub comparability: Vec<ComparabilityEntry>,
    pub monotone: Vec<MonotoneEntry>,
    pub all_bounded: bool,
    pub violations: usize,
}

fn ln_phi(phi: &Phi, x: f64) -> f64 {
    phi.ln_eval(x.min(PHI_ARG_CAP))
}

fn drift_free(ln_ratios: &[f64]) -> bool {
    let n = ln_ratios.len();
    if n < 4 {
        return true;
    }
    let tail = (n / 8).max(1);
    let interior = &ln_ratios[..n - tail];
    let (lo, hi) = interior.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    let slack = 1.5f64.ln();
    ln_ratios[n - tail..].iter().all(|x| *x <= hi + slack && *x >= lo - slack)
}

pub fn phi_asymptotics_report(phi: &Phi, options: &AsymptoticsOptions) -> PhiAsymptoticsReport {
    let mut comparability = Vec::new();
    for &k in &options.k_grid {
        let kinds: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
            ("shift", Box::new(move |a: f64| a + k)),
            ("scale", Box::new(move |a: f64| k * a)),
            ("power", Box::new(move |a: f64| a.powf(k))),
        ];
        for (kind, map) in kinds {
            let ln: Vec<f64> = options.a_grid.iter().map(|&a| ln_phi(phi, map(a)) - ln_phi(phi, a)).collect();
            let (lo, hi) = ln.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
            comparability.push(ComparabilityEntry {
                kind: kind.to_string(),
                k,
                min_ratio: lo.exp(),
                max_ratio: hi.exp(),
                bounded: lo.is_finite() && hi.is_finite() && drift_free(&ln),
            });
        }
    }
    let tau = &options.tau_grid;
    let ln_claim = options.claimed_constant.ln() + 1e-12;
    let mut monotone = Vec::new();
    for &(delta, alpha) in &options.monotone_pairs {
        let up: Vec<f64> = tau.iter().map(|t| delta * t.ln() + alpha * phi.ln_at_recip(*t)).collect();
        let down: Vec<f64> = tau.iter().map(|t| -delta * t.ln() + alpha * phi.ln_at_recip(*t)).collect();
        let (mut inc, mut dec) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut violations = 0;
        let mut pairs = 0;
        for j in 0..tau.len() {
            for i in 0..=j {
                pairs += 1;
                let a = up[i] - up[j];
                let b = down[j] - down[i];
                inc = inc.max(a);
                dec = dec.max(b);
                if a > ln_claim || b > ln_claim {
                    violations += 1;
                }
            }
        }
        monotone.push(MonotoneEntry {
            delta,
            alpha,
            increasing_constant: inc.exp(),
            decreasing_constant: dec.exp(),
            pairs,
            violations,
        });
    }
    let violations = monotone.iter().map(|m| m.violations).sum();
    let all_bounded = comparability.iter().all(|c| c.bounded);
    PhiAsymptoticsReport { phi: phi.name(), comparability, monotone, all_bounded, violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_ratios_are_one() {
        let rep = phi_asymptotics_report(&Phi::Identity, &AsymptoticsOptions::default());
        assert!(rep.comparability.iter().all(|c| c.min_ratio == 1.0 && c.max_ratio == 1.0));
        assert!(rep.all_bounded);
    }

    #[test]
    fn log_squares_within_two() {
        let opts = AsymptoticsOptions { k_grid: vec![2.0], a_grid: log_grid(1.0, 1e30, 4), ..Default::default() };
        let rep = phi_asymptotics_report(&Phi::log(1.0), &opts);
        let power = rep.comparability.iter().find(|c| c.kind == "power").unwrap();
        assert!(power.min_ratio >= 1.0 && power.max_ratio <= 2.0 * (1.0 + 1e-12), "{power:?}");
        assert!(rep.all_bounded);
        let first = &rep.monotone[0];
        assert_eq!((first.delta, first.alpha), (0.5, 1.0));
        assert_eq!(first.violations, 0);
    }

    #[test]
    fn exponential_weight_is_flagged() {
        let phi = Phi::custom("exp", |t: f64| t.min(700.0).exp());
        let opts = AsymptoticsOptions { k_grid: vec![2.0], a_grid: log_grid(1.0, 1e3, 8), ..Default::default() };
        let rep = phi_asymptotics_report(&phi, &opts);
        assert!(!rep.all_bounded);
    }
}
