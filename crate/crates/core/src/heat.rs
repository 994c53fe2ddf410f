//! The heat semigroup `S(t)` on the periodic grid.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{unit_ball_volume, Field, GridGeometry};
use crate::norms::{bounded_ratio, log_grid};
use crate::phi::Phi;
use crate::quad;
use crate::rearrangement::rearrange;
use crate::spectral;

/// Tail certificates below this value count as certified.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Clamped negative mass above this fraction of the total is flagged.
pub const CLAMP_TOLERANCE: f64 = 1e-8;

/// `exp(−(L/2)² / (4 D t))`: Gaussian mass scale beyond half the box.
pub fn tail_certificate(geometry: &GridGeometry, d: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let half = 0.5 * geometry.half_width();
    (-(half * half) / (4.0 * d * t)).exp()
}

/// `exp(−(L − ρ)² / (4 D t))` for data supported in `B(0, ρ)`, `ρ < L`.
pub fn support_tail_certificate(geometry: &GridGeometry, d: f64, t: f64, support_radius: f64) -> f64 {
    let gap = geometry.half_width() - support_radius;
    if gap <= 0.0 {
        return 1.0;
    }
    if t <= 0.0 {
        return 0.0;
    }
    (-(gap * gap) / (4.0 * d * t)).exp()
}

/// Largest `D t` whose tail certificate passes on this geometry.
pub fn max_certified_dt(geometry: &GridGeometry) -> f64 {
    let half = 0.5 * geometry.half_width();
    half * half / (4.0 * -TAIL_TOLERANCE.ln())
}

#[derive(Debug, Clone)]
pub struct HeatOutput {
    pub field: Field,
    /// `h^N Σ` of the negative undershoot removed by clamping.
    pub clamped_mass: f64,
    pub tail_certificate: f64,
    pub certified: bool,
    pub clamp_flagged: bool,
}

/// Symbol used for `exp(−D t λ_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatModel {
    /// `λ_k = |ξ_k|²`: the truncated Gaussian.
    #[default]
    Spectral,
    /// `λ_k = Σ_a (2/h)² sin²(π k_a / M)`: the semigroup of the discrete
    /// Laplacian, positivity preserving for every `t`.
    Lattice,
}

type CacheKey = (usize, u64, usize, HeatModel);

fn xi_cache() -> &'static RwLock<HashMap<CacheKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `|ξ|²` table for a geometry, cached.
pub fn wave_numbers(geometry: &GridGeometry) -> Arc<Vec<f64>> {
    symbol(geometry, HeatModel::Spectral)
}

fn lattice_symbol(geometry: &GridGeometry) -> Vec<f64> {
    let m = geometry.cells_per_axis();
    let c = 4.0 / (geometry.spacing() * geometry.spacing());
    let axis: Vec<f64> = (0..m)
        .map(|k| c * (PI * k as f64 / m as f64).sin().powi(2))
        .collect();
    (0..geometry.len())
        .map(|i| {
            let idx = geometry.unflatten(i);
            (0..geometry.dim()).map(|a| axis[idx[a]]).sum()
        })
        .collect()
}

/// Symbol table `λ_k` for a geometry and model, cached.
pub fn symbol(geometry: &GridGeometry, model: HeatModel) -> Arc<Vec<f64>> {
    let key = (geometry.dim(), geometry.half_width().to_bits(), geometry.cells_per_axis(), model);
    if let Some(v) = xi_cache().read().expect("wave-number cache poisoned").get(&key) {
        return v.clone();
    }
    let table = Arc::new(match model {
        HeatModel::Spectral => spectral::wave_numbers_squared(geometry),
        HeatModel::Lattice => lattice_symbol(geometry),
    });
    xi_cache()
        .write()
        .expect("wave-number cache poisoned")
        .entry(key)
        .or_insert(table)
        .clone()
}

/// Spectral propagator bound to one geometry.
#[derive(Debug, Clone)]
pub struct Propagator {
    geometry: GridGeometry,
    xi2: Arc<Vec<f64>>,
}

impl Propagator {
    pub fn new(geometry: &GridGeometry) -> Self {
        Self::with_model(geometry, HeatModel::Spectral)
    }

    pub fn with_model(geometry: &GridGeometry, model: HeatModel) -> Self {
        Self { geometry: *geometry, xi2: symbol(geometry, model) }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        spectral::forward(&self.geometry, values)
    }

    /// Multiplies a spectrum by `exp(−|ξ|² dt)`.
    pub fn decay(&self, spectrum: &mut [Complex64], dt: f64) {
        if dt == 0.0 {
            return;
        }
        for (c, x) in spectrum.iter_mut().zip(self.xi2.iter()) {
            *c *= (-x * dt).exp();
        }
    }

    /// `a · exp(−|ξ|² dt)` added into `acc`.
    pub fn add_decayed(&self, acc: &mut [Complex64], a: &[Complex64], dt: f64, weight: f64) {
        for ((c, s), x) in acc.iter_mut().zip(a).zip(self.xi2.iter()) {
            *c += s * (weight * (-x * dt).exp());
        }
    }

    /// Back to real space with negative round-off clamped; returns the clamped mass.
    pub fn to_values(&self, spectrum: Vec<Complex64>) -> (Vec<f64>, f64) {
        let mut values = spectral::inverse(&self.geometry, spectrum);
        let mut clamped = 0.0;
        for v in values.iter_mut() {
            if *v < 0.0 {
                clamped -= *v;
                *v = 0.0;
            }
        }
        (values, clamped * self.geometry.cell_volume())
    }

    pub fn apply(&self, values: &[f64], dt: f64) -> (Vec<f64>, f64) {
        if dt == 0.0 {
            return (values.to_vec(), 0.0);
        }
        let mut spec = self.forward(values);
        self.decay(&mut spec, dt);
        self.to_values(spec)
    }
}

/// `S(D t) f` via the discrete Fourier multiplier `exp(−D |ξ_k|² t)`.
pub fn heat_apply(field: &Field, d: f64, t: f64) -> Result<HeatOutput> {
    if !(d > 0.0 && d.is_finite()) {
        return invalid(format!("diffusivity D = {d} must be positive"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return invalid(format!("time t = {t} must be non-negative"));
    }
    let geometry = field.geometry();
    let cert = tail_certificate(geometry, d, t);
    if t == 0.0 {
        return Ok(HeatOutput {
            field: field.clone(),
            clamped_mass: 0.0,
            tail_certificate: 0.0,
            certified: true,
            clamp_flagged: false,
        });
    }
    let (values, clamped_mass) = Propagator::new(geometry).apply(field.values(), d * t);
    let total = field.integral();
    Ok(HeatOutput {
        field: Field::from_raw(*geometry, values),
        clamped_mass,
        tail_certificate: cert,
        certified: cert < TAIL_TOLERANCE,
        clamp_flagged: clamped_mass > CLAMP_TOLERANCE * total,
    })
}

/// Periodized 1D Gaussian at signed cell offsets `k = 0..M` (minimal image).
pub fn periodized_kernel_1d(geometry: &GridGeometry, dt: f64) -> Vec<f64> {
    let m = geometry.cells_per_axis();
    let h = geometry.spacing();
    let period = 2.0 * geometry.half_width();
    let images = ((40.0 * 4.0 * dt).sqrt() / period).ceil() as i64 + 1;
    let norm = 1.0 / (4.0 * PI * dt).sqrt();
    (0..m)
        .map(|k| {
            let x = if k <= m / 2 { k as f64 * h } else { (k as f64 - m as f64) * h };
            let mut s = 0.0;
            for n in -images..=images {
                let y = x + n as f64 * period;
                s += (-y * y / (4.0 * dt)).exp();
            }
            norm * s
        })
        .collect()
}

/// Dense sum over cells of the periodized Gaussian kernel.
pub fn direct_quadrature_oracle(field: &Field, d: f64, t: f64) -> Result<Field> {
    let geometry = field.geometry();
    if geometry.len() > 64 * 64 {
        return Err(Error::SizeGuard(format!(
            "direct oracle needs M^N ≤ 4096, got {}",
            geometry.len()
        )));
    }
    if !(d > 0.0 && t > 0.0) {
        return invalid("direct oracle needs D > 0 and t > 0");
    }
    let k1 = periodized_kernel_1d(geometry, d * t);
    let m = geometry.cells_per_axis();
    let h_n = geometry.cell_volume();
    let f = field.values();
    let mut out = vec![0.0; geometry.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        let xi = geometry.unflatten(i);
        let mut sum = 0.0;
        for (j, fj) in f.iter().enumerate() {
            if *fj == 0.0 {
                continue;
            }
            let xj = geometry.unflatten(j);
            let mut k = 1.0;
            for a in 0..geometry.dim() {
                k *= k1[(xi[a] + m - xj[a]) % m];
            }
            sum += k * fj;
        }
        *slot = sum * h_n;
    }
    Field::new(*geometry, out)
}

/// `G(x, t) = (4πt)^{−N/2} exp(−|x|²/(4t))`.
pub fn gaussian(x: &[f64], t: f64) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (4.0 * PI * t).powf(-(x.len() as f64) / 2.0) * (-r2 / (4.0 * t)).exp()
}

/// Closed-form rearrangement of `G(·, D t)`:
/// `(4πDt)^{−N/2} exp(−(s/ω_N)^{2/N} / (4Dt))`.
pub fn kernel_rearrangement_closed_form(dim: usize, d: f64, t: f64, s: f64) -> f64 {
    let dt = d * t;
    let n = dim as f64;
    (4.0 * PI * dt).powf(-n / 2.0) * (-(s / unit_ball_volume(dim)).powf(2.0 / n) / (4.0 * dt)).exp()
}

/// `sup_s |f*(s) − g*(s)| / g*(0)` for `f` the cell-center samples of
/// `G(·, D t)`, including the part of `(0, ∞)` beyond the box.
pub fn kernel_rearrangement_error(geometry: &GridGeometry, d: f64, t: f64) -> Result<f64> {
    if !(d > 0.0 && t > 0.0) {
        return invalid(format!("kernel rearrangement needs D t > 0, got D = {d}, t = {t}"));
    }
    let n = geometry.dim();
    let f = Field::from_fn(*geometry, |x| gaussian(x, d * t))?;
    let p = rearrange(&f);
    let g = |s: f64| kernel_rearrangement_closed_form(n, d, t, s);
    let mut err = 0.0f64;
    for k in 0..p.len() {
        let v = p.levels()[k];
        // g* is decreasing, so the step error peaks at an end point
        err = err.max((v - g(p.start(k))).abs()).max((v - g(p.ends()[k])).abs());
    }
    err = err.max(g(p.total_measure()));
    Ok(err / g(0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelIntegralReport {
    pub r: f64,
    pub q: f64,
    pub gamma: f64,
    pub t: Vec<f64>,
    pub ratio: Vec<f64>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub bounded: bool,
}

/// `∫_0^∞ τ^{q(1−1/r)} Φ(1/τ)^γ g_t*(τ)^q dτ` against `t^{−(Nq/2)(1/r−1/q)} Φ(1/t)^γ`,
/// with `t` the effective time `D t`.
pub fn kernel_weighted_integral_check(
    dim: usize,
    d: f64,
    t_grid: Option<&[f64]>,
    r: f64,
    q: f64,
    gamma: f64,
    phi: &Phi,
) -> Result<KernelIntegralReport> {
    if !(1.0 <= r && r <= q && q.is_finite()) {
        return invalid(format!("kernel integral needs 1 ≤ r ≤ q < ∞, got r = {r}, q = {q}"));
    }
    let default_grid: Vec<f64> = (0..=13).map(|k| 2f64.powi(-k)).rev().collect();
    let t_grid = t_grid.unwrap_or(&default_grid);
    let n = dim as f64;
    let omega = unit_ball_volume(dim);
    let mut ratio = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let dt = d * t;
        let sigma = omega * (4.0 * dt).powf(n / 2.0);
        let amp = (4.0 * PI * dt).powf(-n / 2.0);
        let power = q * (1.0 - 1.0 / r);
        // τ = σ u, so (τ/ω)^{2/N} / (4Dt) = u^{2/N}
        let integrand = |u: f64| {
            let tau = sigma * u;
            let ln = power * tau.ln() + gamma * phi.ln_at_recip(tau) + q * (amp.ln() - u.powf(2.0 / n));
            ln.exp() * sigma
        };
        let upper = (750.0 / q).powf(n / 2.0);
        let value = quad::integrate_geometric(integrand, 1e-40, upper, 1e-10)?;
        if !value.is_finite() {
            return Err(Error::Quadrature(format!("kernel integral diverges at t = {t}")));
        }
        let reference = dt.powf(-(n * q / 2.0) * (1.0 / r - 1.0 / q)) * phi.weight_at_recip(dt, gamma);
        ratio.push(value / reference);
    }
    let max_ratio = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let bounded = bounded_ratio(&ratio, t_grid);
    Ok(KernelIntegralReport { r, q, gamma, t: t_grid.to_vec(), ratio, max_ratio, min_ratio, bounded })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub d_min: f64,
    pub max_excess: f64,
    pub holds: bool,
}

/// Pointwise `G(x, D_i t) ≤ D^{−N/2} G(x, t)` on cell-center displacements,
/// for `max(D1, D2) = 1` and `D = min(D1, D2)`.
pub fn diffusivity_comparison_check(geometry: &GridGeometry, d1: f64, d2: f64, t: f64) -> Result<ComparisonReport> {
    if (d1.max(d2) - 1.0).abs() > 1e-12 || d1.min(d2) <= 0.0 {
        return invalid("diffusivity comparison needs 0 < min(D1, D2) ≤ max(D1, D2) = 1");
    }
    let d = d1.min(d2);
    let n = geometry.dim();
    let mut max_excess = f64::NEG_INFINITY;
    for i in 0..geometry.len() {
        let x = geometry.center(i);
        let rhs = d.powf(-(n as f64) / 2.0) * gaussian(&x[..n], t);
        for di in [d1, d2] {
            let lhs = gaussian(&x[..n], di * t);
            max_excess = max_excess.max((lhs - rhs) / rhs.max(f64::MIN_POSITIVE));
        }
    }
    Ok(ComparisonReport { d_min: d, max_excess, holds: max_excess <= 1e-12 })
}

/// Default dyadic time grid `2^{-13} .. 1` used by kernel checks.
pub fn default_time_grid() -> Vec<f64> {
    log_grid(1e-4, 1.0, 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample_radial, PowerLogProfile};
    use crate::rearrangement::rearrange;

    fn gaussian_field(g: GridGeometry, t: f64) -> Field {
        Field::from_fn(g, |x| gaussian(x, t)).unwrap()
    }

    #[test]
    fn semigroup_on_gaussians() {
        let g = GridGeometry::new(1, 8.0, 512).unwrap();
        let f = gaussian_field(g, 0.05);
        let out = heat_apply(&f, 1.0, 0.05).unwrap();
        assert!(out.certified);
        let expect = gaussian_field(g, 0.1);
        assert!(out.field.max_abs_diff(&expect).unwrap() < 1e-10);
    }

    #[test]
    fn mass_preserved_and_zero_time_identity() {
        let g = GridGeometry::new(2, 4.0, 64).unwrap();
        let f = sample_radial(&g, &PowerLogProfile::power(1.0, 1.0, 1.0)).unwrap();
        let out = heat_apply(&f, 0.7, 0.03).unwrap();
        assert!((out.field.integral() - f.integral()).abs() < 1e-12 * f.integral() + out.clamped_mass);
        assert_eq!(heat_apply(&f, 1.0, 0.0).unwrap().field, f);
        assert!(heat_apply(&f, 0.0, 1.0).is_err());
    }

    #[test]
    fn oracle_single_cell_and_constant() {
        let g = GridGeometry::new(1, 4.0, 32).unwrap();
        let x0 = 11;
        let delta = Field::new(g, (0..32).map(|i| if i == x0 { 1.0 } else { 0.0 }).collect()).unwrap();
        let dt = 0.5;
        let out = direct_quadrature_oracle(&delta, 1.0, dt).unwrap();
        let k = periodized_kernel_1d(&g, dt);
        for i in 0..32 {
            let expect = k[(i + 32 - x0) % 32] * g.cell_volume();
            assert!((out.values()[i] - expect).abs() < 1e-12);
        }
        let c = Field::constant(g, 2.0).unwrap();
        let out = direct_quadrature_oracle(&c, 1.0, dt).unwrap();
        assert!(out.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let big = Field::zeros(GridGeometry::new(2, 4.0, 128).unwrap());
        assert!(matches!(direct_quadrature_oracle(&big, 1.0, 1.0), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn spectral_matches_oracle() {
        let g = GridGeometry::new(2, 4.0, 32).unwrap();
        let f = Field::from_fn(g, |x| ((3.0 * x[0]).sin() + (x[1] * x[0]).cos()).abs()).unwrap();
        let spec = heat_apply(&f, 1.0, 0.5).unwrap().field;
        let orc = direct_quadrature_oracle(&f, 1.0, 0.5).unwrap();
        assert!(spec.max_abs_diff(&orc).unwrap() <= 1e-10 * f.max());
    }

    #[test]
    fn kernel_closed_form_values() {
        let v = kernel_rearrangement_closed_form(1, 1.0, 0.1, 1.0);
        let expect = (0.4 * PI).powf(-0.5) * (-0.625f64).exp();
        assert!((v - expect).abs() < 1e-15);
        assert!((kernel_rearrangement_closed_form(2, 2.0, 0.1, 0.0) - 1.0 / (0.8 * PI)).abs() < 1e-14);
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let v = kernel_rearrangement_closed_form(3, 1.0, 0.2, k as f64 * 0.1);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn sampled_kernel_rearrangement() {
        let g = GridGeometry::new(1, 4.0, 512).unwrap();
        let p = rearrange(&gaussian_field(g, 0.1));
        for k in 0..p.len() {
            let s = 0.5 * (p.start(k) + p.ends()[k]);
            let exact = kernel_rearrangement_closed_form(1, 1.0, 0.1, s);
            if exact > 1e-3 {
                assert!((p.f_star(s) - exact).abs() < 0.02 * kernel_rearrangement_closed_form(1, 1.0, 0.1, 0.0));
            }
        }
    }

    #[test]
    fn kernel_integral_checks() {
        let rep = kernel_weighted_integral_check(1, 1.0, None, 1.0, 1.0, 0.0, &Phi::Identity).unwrap();
        assert!(rep.ratio.iter().all(|r| (r - 1.0).abs() < 1e-8), "{rep:?}");
        let rep = kernel_weighted_integral_check(1, 1.0, None, 1.0, 2.0, 0.0, &Phi::Identity).unwrap();
        assert!(rep.bounded);
        // Φ ≡ 1, r = 1, q = 2: ∫ g*² = ∫ G² = (8πt)^{-1/2}
        let t0 = rep.t[0];
        let exact = (8.0 * PI * t0).powf(-0.5) / t0.powf(-0.5);
        assert!((rep.ratio[0] - exact).abs() < 1e-8 * exact);
        let rep = kernel_weighted_integral_check(2, 1.0, None, 1.0, 2.0, 1.0, &Phi::log(1.0)).unwrap();
        assert!(rep.bounded, "{rep:?}");
        assert!(kernel_weighted_integral_check(1, 1.0, None, 2.0, 1.0, 0.0, &Phi::Identity).is_err());
    }

    #[test]
    fn diffusivity_comparison() {
        let g = GridGeometry::new(2, 4.0, 32).unwrap();
        let rep = diffusivity_comparison_check(&g, 1.0, 0.25, 0.1).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(diffusivity_comparison_check(&g, 2.0, 0.25, 0.1).is_err());
    }

    #[test]
    fn tail_certificate_threshold() {
        let g = GridGeometry::new(1, 8.0, 64).unwrap();
        let dt = max_certified_dt(&g);
        assert!((tail_certificate(&g, 1.0, dt) - TAIL_TOLERANCE).abs() < 1e-20);
    }

    #[test]
    fn lattice_model_is_positive_and_consistent() {
        let g = GridGeometry::new(1, 4.0, 64).unwrap();
        let h = g.spacing();
        let delta: Vec<f64> = (0..64).map(|i| if i == 32 { 1.0 / h } else { 0.0 }).collect();
        let lat = Propagator::with_model(&g, HeatModel::Lattice);
        let spec = Propagator::new(&g);
        let dt = 0.05 * h * h;
        let raw_lat = spectral::inverse(&g, {
            let mut s = lat.forward(&delta);
            lat.decay(&mut s, dt);
            s
        });
        assert!(raw_lat.iter().all(|v| *v > -1e-15), "lattice undershoot");
        let raw_spec = spectral::inverse(&g, {
            let mut s = spec.forward(&delta);
            spec.decay(&mut s, dt);
            s
        });
        assert!(raw_spec.iter().any(|v| *v < -1e-3), "truncated Gaussian rings");
        // mass and semigroup
        let (a, _) = lat.apply(&delta, 0.3);
        let (b, _) = lat.apply(&lat.apply(&delta, 0.1).0, 0.2);
        let mass: f64 = a.iter().sum::<f64>() * h;
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        // smooth data: both models agree to O(h²)
        let f: Vec<f64> = (0..64).map(|i| (-g.coordinate(i).powi(2)).exp()).collect();
        let (x, _) = lat.apply(&f, 0.1);
        let (y, _) = spec.apply(&f, 0.1);
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 0.05 * h * h));
    }

    #[test]
    fn sampled_kernel_rearranges_to_closed_form() {
        let coarse = kernel_rearrangement_error(&GridGeometry::new(1, 2.0, 512).unwrap(), 1.0, 0.01).unwrap();
        let fine = kernel_rearrangement_error(&GridGeometry::new(1, 2.0, 1024).unwrap(), 1.0, 0.01).unwrap();
        assert!(coarse <= 0.02, "{coarse}");
        assert!(fine <= 0.5 * coarse * 1.05, "{coarse} -> {fine}");
    }
}
