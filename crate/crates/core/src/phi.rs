//! Weight functions `Φ` for weak Zygmund norms and their axiom report.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest argument passed to `Φ`.
pub const PHI_ARG_CAP: f64 = 1e300;

/// `ln Φ` sampled on an increasing grid of `z = ln τ ≥ 0`, interpolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTable {
    pub z: Vec<f64>,
    pub ln_phi: Vec<f64>,
}

impl PhiTable {
    fn ln_eval(&self, tau: f64) -> f64 {
        if tau <= 1.0 {
            return 0.0;
        }
        let z = tau.ln();
        let k = self.z.partition_point(|&x| x <= z);
        if k == 0 {
            return self.ln_phi[0];
        }
        if k >= self.z.len() {
            return *self.ln_phi.last().unwrap();
        }
        let (z0, z1) = (self.z[k - 1], self.z[k]);
        let w = (z - z0) / (z1 - z0);
        self.ln_phi[k - 1] * (1.0 - w) + self.ln_phi[k] * w
    }
}

#[derive(Clone)]
pub enum Phi {
    /// `Φ ≡ 1`.
    Identity,
    /// `Φ(τ) = [log(e + τ)]^a`.
    LogPower { power: f64 },
    /// User-supplied `Φ`.
    Custom {
        name: String,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
    Tabulated { name: String, table: Arc<PhiTable> },
}

impl fmt::Debug for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Identity => write!(f, "Phi::Identity"),
            Phi::LogPower { power } => write!(f, "Phi::LogPower({power})"),
            Phi::Custom { name, .. } => write!(f, "Phi::Custom({name})"),
            Phi::Tabulated { name, .. } => write!(f, "Phi::Tabulated({name})"),
        }
    }
}

impl Phi {
    pub fn log(power: f64) -> Phi {
        if power == 0.0 {
            Phi::Identity
        } else {
            Phi::LogPower { power }
        }
    }

    pub fn custom(name: &str, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Phi {
        Phi::Custom { name: name.to_string(), eval: Arc::new(eval) }
    }

    pub fn name(&self) -> String {
        match self {
            Phi::Identity => "identity".into(),
            Phi::LogPower { power } => format!("log_power({power})"),
            Phi::Custom { name, .. } | Phi::Tabulated { name, .. } => name.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Phi::Identity) || matches!(self, Phi::LogPower { power } if *power == 0.0)
    }

    /// `ln Φ(τ)`, with `τ` capped at [`PHI_ARG_CAP`].
    pub fn ln_eval(&self, tau: f64) -> f64 {
        let tau = tau.clamp(0.0, PHI_ARG_CAP);
        match self {
            Phi::Identity => 0.0,
            Phi::LogPower { power } => power * ln_e_plus(tau).ln(),
            Phi::Custom { eval, .. } => eval(tau).ln(),
            Phi::Tabulated { table, .. } => table.ln_eval(tau),
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        match self {
            Phi::Identity => 1.0,
            Phi::Custom { eval, .. } => eval(tau.clamp(0.0, PHI_ARG_CAP)),
            _ => self.ln_eval(tau).exp(),
        }
    }

    /// `ln Φ(1/s)`.
    pub fn ln_at_recip(&self, s: f64) -> f64 {
        if s <= 1.0 / PHI_ARG_CAP {
            self.ln_eval(PHI_ARG_CAP)
        } else {
            self.ln_eval(1.0 / s)
        }
    }

    /// `Φ(1/s)^α`.
    pub fn weight_at_recip(&self, s: f64, alpha: f64) -> f64 {
        if alpha == 0.0 || self.is_identity() {
            1.0
        } else {
            (alpha * self.ln_at_recip(s)).exp()
        }
    }
}

/// `log(e + τ)`, accurate for huge `τ`.
fn ln_e_plus(tau: f64) -> f64 {
    if tau > 1e8 {
        tau.ln() + (std::f64::consts::E / tau).ln_1p()
    } else {
        (std::f64::consts::E + tau).ln()
    }
}

/// Serializable description of a built-in `Φ` (or `Ψ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiSpec {
    pub family: PhiFamily,
    #[serde(default)]
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiFamily {
    Identity,
    #[serde(alias = "log")]
    LogPower,
}

impl PhiSpec {
    pub fn identity() -> Self {
        Self { family: PhiFamily::Identity, power: 0.0 }
    }

    pub fn log_power(power: f64) -> Self {
        Self { family: PhiFamily::LogPower, power }
    }

    pub fn build(&self) -> Result<Phi> {
        match self.family {
            PhiFamily::Identity => Ok(Phi::Identity),
            PhiFamily::LogPower => {
                if !(self.power.is_finite() && self.power >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "log-power exponent must be finite and ≥ 0, got {}",
                        self.power
                    )));
                }
                Ok(Phi::log(self.power))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Phi3Entry {
    pub delta: f64,
    pub tau_delta: f64,
    pub c_delta: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub phi: String,
    pub phi0: f64,
    pub non_decreasing: bool,
    pub phi2_constant: f64,
    pub phi2_bounded: bool,
    pub phi3: Vec<Phi3Entry>,
    pub passed: bool,
}

/// Measures the constants of the three axioms on dyadic samples.
pub fn phi_axiom_report(phi: &Phi) -> Result<AxiomReport> {
    let phi0 = phi.eval(0.0);
    if !((phi0 - 1.0).abs() <= 1e-12) {
        return Err(Error::AxiomViolation(format!("Φ(0) = {phi0}, expected 1")));
    }
    // monotonicity on a log grid over [2^-20, 2^990]
    let mut non_decreasing = true;
    let mut prev = phi.ln_eval(0.0);
    for k in -80..=3960 {
        let tau = 2f64.powf(k as f64 / 4.0);
        let v = phi.ln_eval(tau);
        if !v.is_nan() && v < prev - 1e-12 * prev.abs().max(1.0) {
            non_decreasing = false;
        }
        if !v.is_nan() {
            prev = v;
        }
    }

    // Φ(a²) ≤ C Φ(a) on a = 2^0..2^60
    let ratios: Vec<f64> = (0..=60)
        .map(|k| {
            let a = 2f64.powi(k);
            (phi.ln_eval(a * a) - phi.ln_eval(a)).exp()
        })
        .collect();
    let phi2_constant = ratios.iter().copied().fold(0.0, f64::max);
    let phi2_bounded = ratios.iter().all(|r| r.is_finite()) && ratios[60] <= 1.05 * ratios[40].max(1.0);

    // τ^{-δ}Φ(τ) almost decreasing beyond τ_δ = 1
    let phi3 = [0.1, 0.5, 1.0]
        .iter()
        .map(|&delta| {
            let tau_delta = 1.0;
            let mut running_min = f64::INFINITY;
            let mut c = 1.0f64;
            let mut c_at_300 = 1.0;
            for k in 0..=2400 {
                let ln_tau = k as f64 * std::f64::consts::LN_2 / 4.0;
                let ln_h = -delta * ln_tau + phi.ln_eval(ln_tau.exp());
                running_min = running_min.min(ln_h);
                c = c.max((ln_h - running_min).exp());
                if k == 1200 {
                    c_at_300 = c;
                }
            }
            let bounded = c.is_finite() && c <= 1.05 * c_at_300;
            Phi3Entry { delta, tau_delta, c_delta: c, bounded }
        })
        .collect::<Vec<_>>();

    let passed = non_decreasing && phi2_bounded && phi3.iter().all(|e| e.bounded);
    Ok(AxiomReport {
        phi: phi.name(),
        phi0,
        non_decreasing,
        phi2_constant,
        phi2_bounded,
        phi3,
        passed,
    })
}
