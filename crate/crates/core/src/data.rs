//! Case classification (A)–(F) and the borderline initial-data families.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{sample_radial_with, Field, GridGeometry, OriginRule, PowerLogProfile};
use crate::phi::{phi_axiom_report, AxiomReport, Phi, PhiFamily, PhiSpec, PhiTable};
use crate::quad;
use crate::system::SystemParams;

/// Relative tolerance for the equalities separating the cases.
pub const CASE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// The case together with the quantities that decide it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseLabel {
    pub case: Case,
    /// `(q+1)/(pq−1)`.
    pub ratio: f64,
    pub half_dim: f64,
    pub q: f64,
    /// `1 + 2/N`.
    pub fujita: f64,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= CASE_TOLERANCE * a.abs().max(b.abs())
}

pub fn classify_case(dim: usize, p: f64, q: f64) -> Result<CaseLabel> {
    if dim == 0 {
        return invalid("N must be at least 1");
    }
    if !(p.is_finite() && q.is_finite() && p > 0.0) {
        return invalid(format!("exponents must be finite with p > 0, got p = {p}, q = {q}"));
    }
    if p > q {
        return invalid(format!("p ≤ q required, got p = {p} > q = {q}"));
    }
    if p * q <= 1.0 {
        return invalid(format!("pq > 1 required, got pq = {}", p * q));
    }
    let n = dim as f64;
    let ratio = (q + 1.0) / (p * q - 1.0);
    let half_dim = 0.5 * n;
    let fujita = 1.0 + 2.0 / n;
    let case = if close(ratio, half_dim) {
        if close(p, q) {
            Case::C
        } else {
            Case::B
        }
    } else if ratio < half_dim {
        Case::A
    } else if close(q, fujita) {
        Case::E
    } else if q > fujita {
        Case::D
    } else {
        Case::F
    };
    Ok(CaseLabel { case, ratio, half_dim, q, fujita })
}

/// `h(r) = [log(e+1/r)]^{−a} [log(e+log(e+1/r))]^{−b}` on `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HSpec {
    #[serde(default)]
    pub log_power: f64,
    #[serde(default)]
    pub iterated_log_power: f64,
}

impl HSpec {
    pub fn log(a: f64) -> Self {
        Self { log_power: a, iterated_log_power: 0.0 }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let l = crate::field::ln_e_plus_inv(r);
        l.powf(-self.log_power) * (std::f64::consts::E + l).ln().powf(-self.iterated_log_power)
    }

    /// `h(e^{−z})` without overflow.
    fn eval_log(&self, z: f64) -> f64 {
        // log(e + e^z) = z + log(1 + e^{1−z})
        let l = if z > 30.0 { z + (1.0 - z).exp().ln_1p() } else { (std::f64::consts::E + z.exp()).ln() };
        l.powf(-self.log_power) * (std::f64::consts::E + l).ln().powf(-self.iterated_log_power)
    }

    /// Positivity and monotonicity of `h` on `10^4` points of `(0, 1]`, and the
    /// first `ε` in `ε_0, 2ε_0, …, ≤ 8` making `r^{−ε} h(r)` decreasing there.
    pub fn scan(&self, epsilon0: f64) -> HScan {
        let pts: Vec<f64> = (0..10_000).map(|k| 10f64.powf(-12.0 + 12.0 * k as f64 / 9_999.0)).collect();
        let vals: Vec<f64> = pts.iter().map(|&r| self.eval(r)).collect();
        let positive = vals.iter().all(|v| *v > 0.0 && v.is_finite());
        let increasing = vals.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-14));
        let decreasing_with = |eps: f64| {
            pts.iter()
                .zip(&vals)
                .map(|(r, v)| r.powf(-eps) * v)
                .collect::<Vec<_>>()
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + 1e-14))
        };
        let mut epsilon = epsilon0;
        let mut eps_decreasing = decreasing_with(epsilon);
        while !eps_decreasing && epsilon < 8.0 {
            epsilon *= 2.0;
            eps_decreasing = decreasing_with(epsilon);
        }
        HScan { epsilon, positive, increasing, eps_decreasing }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HScan {
    pub epsilon: f64,
    pub positive: bool,
    pub increasing: bool,
    pub eps_decreasing: bool,
}

/// Shape of the measure-like component `ν` in cases D, E, F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuShape {
    /// All mass in the origin cell.
    #[default]
    Dirac,
    /// Uniform on the grid points of `B(0,1)`.
    Ball,
}

/// Constants and shape parameters of a data family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFamily {
    pub case: Case,
    pub c1: f64,
    pub c2: f64,
    /// `h_1` (case D) or `h_2` (case E).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<HSpec>,
    /// `Φ` for case D: `μ = |x|^{−(N+2)/q} Φ(1/|x|)^{−1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    /// `Ψ` for case E: `μ = |x|^{−N} Ψ(1/|x|)^{−1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PhiSpec>,
    /// Total mass of `ν` in cases D, E, F (and of `μ` per unit `c1` in case F).
    #[serde(default = "unit")]
    pub nu_mass: f64,
    #[serde(default)]
    pub nu_shape: NuShape,
    #[serde(default)]
    pub origin_rule: OriginRule,
}

fn unit() -> f64 {
    1.0
}

impl DataFamily {
    pub fn new(case: Case, c1: f64, c2: f64) -> Self {
        Self {
            case,
            c1,
            c2,
            h: None,
            phi: None,
            psi: None,
            nu_mass: 1.0,
            nu_shape: NuShape::Dirac,
            origin_rule: OriginRule::CellAverage,
        }
    }

    pub fn with_constants(&self, c1: f64, c2: f64) -> Self {
        Self { c1, c2, ..self.clone() }
    }

    pub fn with_h(mut self, h: HSpec) -> Self {
        self.h = Some(h);
        self
    }

    pub fn with_psi(mut self, psi: PhiSpec) -> Self {
        self.psi = Some(psi);
        self
    }

    pub fn with_phi(mut self, phi: PhiSpec) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn with_nu(mut self, mass: f64, shape: NuShape) -> Self {
        self.nu_mass = mass;
        self.nu_shape = shape;
        self
    }
}

/// The integral condition deciding existence for cases D and E.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admission {
    pub criterion: String,
    /// Truncated value `∫_0^{Z}` in the variable `z = log(1/r)`.
    pub partial_integral: f64,
    pub truncation: f64,
    pub finite: bool,
    pub nonexistence_predicted: bool,
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub mu: Field,
    pub nu: Field,
    pub admission: Option<Admission>,
    pub h_scan: Option<HScan>,
}

/// Samples `(μ, ν)` for the family on the grid.
pub fn make_data(family: &DataFamily, params: &SystemParams, geometry: &GridGeometry) -> Result<InitialData> {
    let label = params.case();
    if label.case != family.case {
        return invalid(format!(
            "data family is for case {} but the parameters are in case {}",
            family.case, label.case
        ));
    }
    if geometry.dim() != params.dim {
        return invalid(format!("grid dimension {} differs from N = {}", geometry.dim(), params.dim));
    }
    for (name, c) in [("c1", family.c1), ("c2", family.c2), ("nu_mass", family.nu_mass)] {
        if !(c >= 0.0 && c.is_finite()) {
            return invalid(format!("{name} = {c} must be finite and ≥ 0"));
        }
    }
    let (n, p, q) = (params.dim as f64, params.p, params.q);
    let pq1 = p * q - 1.0;
    let sample = |profile: PowerLogProfile, c: f64| -> Result<Field> {
        let f = sample_radial_with(geometry, &profile, family.origin_rule)?;
        f.scale(c)
    };
    let unit_power = |a: f64| PowerLogProfile::power(1.0, a, 1.0);
    let mut admission = None;
    let mut h_scan = None;
    let (mu, nu) = match family.case {
        Case::A => (
            sample(unit_power(2.0 * (p + 1.0) / pq1), family.c1)?,
            sample(unit_power(2.0 * (q + 1.0) / pq1), family.c2)?,
        ),
        Case::B => (
            sample(unit_power(2.0 * (p + 1.0) / pq1).with_log(p / pq1), family.c1)?,
            sample(unit_power(n).with_log(1.0 / pq1 + 1.0), family.c2)?,
        ),
        Case::C => {
            let shape = unit_power(n).with_log(0.5 * n + 1.0);
            (sample(shape, family.c1)?, sample(shape, family.c2)?)
        }
        Case::D => {
            let h = match (&family.h, &family.phi) {
                (Some(h), None) => *h,
                (None, Some(phi)) => h_from_log_spec(phi, "phi")?,
                (None, None) => return invalid("case D data needs `h` or `phi`"),
                (Some(_), Some(_)) => return invalid("case D data takes `h` or `phi`, not both"),
            };
            let scan = h.scan(0.01);
            if !(scan.positive && scan.increasing && scan.eps_decreasing) {
                return invalid(format!("h_1 fails the shape conditions: {scan:?}"));
            }
            h_scan = Some(scan);
            admission = Some(case_d_admission(&h, q)?);
            let shape = unit_power((n + 2.0) / q).with_log(h.log_power).with_iterated_log(h.iterated_log_power);
            (sample(shape, family.c1)?, nu_field(family, geometry)?)
        }
        Case::E => {
            let h = match (&family.h, &family.psi) {
                (Some(h), None) => *h,
                (None, Some(psi)) => h_from_log_spec(psi, "psi")?,
                (None, None) => return invalid("case E data needs `h` or `psi`"),
                (Some(_), Some(_)) => return invalid("case E data takes `h` or `psi`, not both"),
            };
            let scan = h.scan(0.01);
            if !(scan.positive && scan.increasing) {
                return invalid(format!("h_2 fails the shape conditions: {scan:?}"));
            }
            h_scan = Some(scan);
            if !(h.log_power > 1.0 || (h.log_power == 1.0 && h.iterated_log_power > 1.0)) {
                return Err(Error::NonIntegrable(format!(
                    "|x|^-N h_2(|x|) needs ∫_0^1 h_2(τ)τ^-1 dτ < ∞: log power {} must exceed 1",
                    h.log_power
                )));
            }
            admission = Some(case_e_admission(&h, q)?);
            let shape = unit_power(n).with_log(h.log_power).with_iterated_log(h.iterated_log_power);
            (sample(shape, family.c1)?, nu_field(family, geometry)?)
        }
        Case::F => {
            let unit_family = DataFamily { nu_mass: 1.0, ..family.clone() };
            (
                nu_field(&unit_family, geometry)?.scale(family.c1)?,
                nu_field(family, geometry)?.scale(family.c2)?,
            )
        }
    };
    Ok(InitialData { mu, nu, admission, h_scan })
}

fn h_from_log_spec(spec: &PhiSpec, key: &str) -> Result<HSpec> {
    match spec.family {
        PhiFamily::LogPower => Ok(HSpec::log(spec.power)),
        PhiFamily::Identity => Ok(HSpec::log(0.0)),
    }
    .and_then(|h| {
        if !(h.log_power.is_finite() && h.log_power >= 0.0) {
            invalid(format!("`{key}` power must be ≥ 0"))
        } else {
            Ok(h)
        }
    })
}

/// `ν` with total mass `nu_mass`, as a one-cell spike or uniform on `B(0,1)`.
pub fn nu_field(family: &DataFamily, geometry: &GridGeometry) -> Result<Field> {
    match family.nu_shape {
        NuShape::Dirac => Field::point_mass(*geometry, geometry.origin_index(), family.nu_mass),
        NuShape::Ball => {
            let count = (0..geometry.len()).filter(|&i| geometry.radius(i) < 1.0).count();
            if count == 0 {
                return invalid("B(0,1) contains no grid points");
            }
            let level = family.nu_mass / (count as f64 * geometry.cell_volume());
            Field::from_fn(*geometry, |x| {
                if x.iter().map(|c| c * c).sum::<f64>().sqrt() < 1.0 {
                    level
                } else {
                    0.0
                }
            })
        }
    }
}

/// Truncation point in `z = log(1/r)` for the criterion integrals.
const Z_CUT: f64 = 690.0;

fn partial(f: impl Fn(f64) -> f64) -> Result<f64> {
    // panels of doubling length in z
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b: f64 = 1.0;
    while a < Z_CUT {
        let hi = b.min(Z_CUT);
        total += quad::integrate_relative(&f, a, hi, 1e-10)?;
        a = hi;
        b *= 2.0;
    }
    Ok(total)
}

/// `∫_0^1 h_1(τ)^q τ^{−1} dτ < ∞`, i.e. `aq > 1` (or `aq = 1`, `bq > 1`).
pub fn case_d_admission(h: &HSpec, q: f64) -> Result<Admission> {
    let partial_integral = partial(|z| h.eval_log(z).powf(q))?;
    let (a, b) = (h.log_power * q, h.iterated_log_power * q);
    let finite = a > 1.0 || (a == 1.0 && b > 1.0);
    Ok(Admission {
        criterion: "int_0^1 h_1(t)^q t^-1 dt < inf".into(),
        partial_integral,
        truncation: Z_CUT,
        finite,
        nonexistence_predicted: !finite,
    })
}

/// `∫_0^1 [∫_0^r h_2(τ)τ^{−1}dτ]^q r^{−1} dr < ∞`; for `h_2 = log^{−b}` this
/// is `q(b − 1) > 1`.
pub fn case_e_admission(h: &HSpec, q: f64) -> Result<Admission> {
    // inner H(z) = ∫_z^∞ h_2(e^{−y}) dy; tail beyond the cut by the local power law
    let inner = |z: f64| -> f64 {
        let zc = Z_CUT.max(2.0 * z);
        let head = quad::integrate_relative(|y| h.eval_log(y), z, zc, 1e-10).unwrap_or(f64::NAN);
        head + power_tail(|y| h.eval_log(y), zc)
    };
    let partial_integral = partial(|z| inner(z).powf(q))?;
    let a = (h.log_power - 1.0) * q;
    let finite = a > 1.0 || (a == 1.0 && h.iterated_log_power * q > 1.0);
    Ok(Admission {
        criterion: "int_0^1 [int_0^r h_2(t) t^-1 dt]^q r^-1 dr < inf".into(),
        partial_integral,
        truncation: Z_CUT,
        finite,
        nonexistence_predicted: !finite,
    })
}

/// `∫_Z^∞ f` for `f(z) ≈ C z^{−κ}`, `κ` measured on `[Z/2, Z]`; infinite if `κ ≤ 1`.
fn power_tail(f: impl Fn(f64) -> f64, z: f64) -> f64 {
    let (f1, f2) = (f(0.5 * z), f(z));
    if f2 == 0.0 {
        return 0.0;
    }
    let kappa = (f1 / f2).ln() / std::f64::consts::LN_2;
    if kappa <= 1.0 {
        f64::INFINITY
    } else {
        f2 * z / (kappa - 1.0)
    }
}

/// `∫_0^1 s^{−1} Φ(s^{−1})^{−q} ds < ∞` for `Φ = [log(e+·)]^a` is `aq > 1`.
pub fn phi_integrability(phi: &PhiSpec, q: f64) -> Result<Admission> {
    let built = phi.build()?;
    let partial_integral = partial(|z| (-q * built.ln_eval(z.exp())).exp())?;
    let finite = match phi.family {
        PhiFamily::Identity => false,
        PhiFamily::LogPower => phi.power * q > 1.0,
    };
    Ok(Admission {
        criterion: "int_0^1 s^-1 Phi(1/s)^-q ds < inf".into(),
        partial_integral,
        truncation: Z_CUT,
        finite,
        nonexistence_predicted: !finite,
    })
}

/// `Φ` built from `Ψ` by `Φ(s) = (∫_0^{1/s} τ^{−1} Ψ(1/τ)^{−1} χ_{(0,1)} dτ)^{−1}`.
#[derive(Debug, Clone)]
pub struct PhiFromPsi {
    pub phi: Phi,
    /// `∫_0^1 τ^{−1} Ψ(1/τ)^{−1} dτ` before normalisation.
    pub normalization: f64,
    pub rescaled: bool,
    pub axioms: AxiomReport,
}

/// Tabulates `ln Φ` on `z = ln s ∈ [0, 691]`. With `auto_rescale`, `Ψ` is
/// multiplied by the constant that makes the normalisation integral 1.
pub fn build_phi_from_psi(psi: &PhiSpec, auto_rescale: bool) -> Result<PhiFromPsi> {
    let psi_fn = psi.build()?;
    // I(z) = ∫_z^∞ Ψ(e^y)^{-1} dy
    let g = |y: f64| (-psi_fn.ln_eval(y.exp())).exp();
    let z_max = 691.0;
    let tail = power_tail(g, z_max);
    if !tail.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "∫_0^1 τ^-1 Ψ(1/τ)^-1 dτ diverges for Ψ = {}",
            psi_fn.name()
        )));
    }
    let mut nodes: Vec<f64> = (0..)
        .map(|k| 2f64.powf(k as f64 / 16.0) - 1.0)
        .take_while(|z| *z < z_max)
        .collect();
    nodes.push(z_max);
    let mut integral = vec![0.0; nodes.len()];
    let last = nodes.len() - 1;
    integral[last] = tail;
    for k in (0..last).rev() {
        integral[k] = integral[k + 1] + quad::integrate_relative(g, nodes[k], nodes[k + 1], 1e-12)?;
    }
    let normalization = integral[0];
    let rescaled = (normalization - 1.0).abs() > 1e-8;
    if rescaled && !auto_rescale {
        return Err(Error::InvalidParameter(format!(
            "∫_0^1 τ^-1 Ψ(1/τ)^-1 dτ = {normalization}, expected 1 (enable auto_rescale)"
        )));
    }
    let ln_phi: Vec<f64> = integral.iter().map(|i| (normalization / i).ln()).collect();
    let table = PhiTable { z: nodes, ln_phi };
    let phi = Phi::Tabulated { name: format!("phi_from_psi({})", psi_fn.name()), table: Arc::new(table) };
    let axioms = phi_axiom_report(&phi)?;
    Ok(PhiFromPsi { phi, normalization, rescaled, axioms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_case(2, 2.0, 3.0).unwrap().case, Case::A);
        assert_eq!(classify_case(1, 3.0, 3.0).unwrap().case, Case::C);
        assert_eq!(classify_case(2, 1.0, 2.0).unwrap().case, Case::E);
        assert_eq!(classify_case(2, 1.5, 4.0).unwrap().case, Case::B);
        assert_eq!(classify_case(1, 1.2, 4.0).unwrap().case, Case::D);
        assert_eq!(classify_case(1, 1.2, 2.0).unwrap().case, Case::F);
        assert!(classify_case(1, 0.5, 1.0).is_err());
        assert!(classify_case(1, 3.0, 2.0).is_err());
        let l = classify_case(2, 2.0, 3.0).unwrap();
        assert!((l.ratio - 0.8).abs() < 1e-15 && l.half_dim == 1.0);
    }

    #[test]
    fn case_a_zero_constants() {
        let params = SystemParams::new(2, 2.0, 3.0, 1.0, 1.0).unwrap();
        let g = GridGeometry::new(2, 2.0, 32).unwrap();
        let d = make_data(&DataFamily::new(Case::A, 0.0, 0.0), &params, &g).unwrap();
        assert_eq!(d.mu.max(), 0.0);
        assert_eq!(d.nu.max(), 0.0);
        assert!(make_data(&DataFamily::new(Case::B, 1.0, 1.0), &params, &g).is_err());
    }

    #[test]
    fn case_d_criterion() {
        let q = 4.0;
        assert!(case_d_admission(&HSpec::log(0.5), q).unwrap().finite);
        let bad = case_d_admission(&HSpec::log(0.25), q).unwrap();
        assert!(!bad.finite && bad.nonexistence_predicted);
        assert!(phi_integrability(&PhiSpec::log_power(0.3), q).unwrap().finite);
        assert!(!phi_integrability(&PhiSpec::log_power(0.25), q).unwrap().finite);
        // the truncated integral grows with the cut in the divergent case
        let conv = phi_integrability(&PhiSpec::log_power(1.0), q).unwrap().partial_integral;
        assert!(conv < 1.0);
        let div = phi_integrability(&PhiSpec::log_power(0.25), q).unwrap().partial_integral;
        assert!(div > 5.0);
    }

    #[test]
    fn case_e_criterion_and_rejection() {
        let params = SystemParams::new(2, 1.0, 2.0, 1.0, 1.0).unwrap();
        let g = GridGeometry::new(2, 2.0, 32).unwrap();
        let fam = DataFamily::new(Case::E, 1.0, 1.0).with_h(HSpec::log(2.0));
        let d = make_data(&fam, &params, &g).unwrap();
        assert!(d.admission.unwrap().finite);
        let fam = DataFamily::new(Case::E, 1.0, 1.0).with_h(HSpec::log(1.2));
        let d = make_data(&fam, &params, &g).unwrap();
        assert!(d.admission.unwrap().nonexistence_predicted);
        let fam = DataFamily::new(Case::E, 1.0, 1.0).with_h(HSpec::log(0.8));
        assert!(matches!(make_data(&fam, &params, &g), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn h_scans() {
        let s = HSpec::log(1.0).scan(0.01);
        assert!(s.positive && s.increasing && s.eps_decreasing);
        // d log h / d log r peaks at r = 1 with value 1/((e+1) log(e+1)) ≈ 0.205
        assert!(s.epsilon > 0.2 && s.epsilon <= 0.32, "{s:?}");
        let s = HSpec { log_power: -1.0, iterated_log_power: 0.0 }.scan(0.01);
        assert!(!s.increasing);
    }

    #[test]
    fn nu_mass_is_exact() {
        let g = GridGeometry::new(2, 2.0, 32).unwrap();
        for shape in [NuShape::Dirac, NuShape::Ball] {
            let f = nu_field(&DataFamily::new(Case::F, 1.0, 1.0).with_nu(3.0, shape), &g).unwrap();
            assert!((f.integral() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_identity_is_rejected() {
        assert!(build_phi_from_psi(&PhiSpec::identity(), true).is_err());
    }

    #[test]
    fn psi_log_squared() {
        let out = build_phi_from_psi(&PhiSpec::log_power(2.0), true).unwrap();
        assert!(out.rescaled);
        assert!(build_phi_from_psi(&PhiSpec::log_power(2.0), false).is_err());
        assert!((out.phi.eval(0.0) - 1.0).abs() < 1e-15);
        assert!((out.phi.eval(0.5) - 1.0).abs() < 1e-15);
        assert!(out.axioms.passed, "{:?}", out.axioms);
        let ratios: Vec<f64> = (0..=80)
            .map(|k| {
                let s = 10f64.powf(k as f64 / 10.0);
                out.phi.eval(s) / (std::f64::consts::E + s).ln()
            })
            .collect();
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 5.0, "{lo} {hi}");
        // closed form far out: I(z) ≈ 1/z, so Φ(e^z) ≈ normalization · z
        let z: f64 = 400.0;
        let v = out.phi.ln_eval(z.exp());
        assert!((v - (out.normalization * z).ln()).abs() < 0.02, "{v}");
    }
}
