//! Distribution functions, non-increasing rearrangements `f*` and maximal
//! averages `f**` of discrete fields.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::report::fmt_f64;
use crate::spectral;

/// Piecewise-constant `f*`: level `v_k` on `[s_{k-1}, s_k)` with `s_0 = 0`,
/// zero beyond `s_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    ends: Vec<f64>,
    levels: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepProfile {
    /// Builds the profile of a list of cell values, each an atom of measure `cell_volume`.
    pub fn from_values(values: &[f64], cell_volume: f64) -> Self {
        let mut sorted: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
        sorted.sort_unstable_by(|a, b| b.total_cmp(a));
        let mut ends = Vec::new();
        let mut levels = Vec::new();
        let mut cumulative = Vec::new();
        let mut count = 0usize;
        let mut mass = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let v = sorted[i];
            let mut j = i;
            while j < sorted.len() && sorted[j] == v {
                j += 1;
            }
            let n = j - i;
            count += n;
            mass += n as f64 * cell_volume * v;
            ends.push(count as f64 * cell_volume);
            levels.push(v);
            cumulative.push(mass);
            i = j;
        }
        Self { ends, levels, cumulative }
    }

    /// Builds a profile from explicit steps; levels must be positive and strictly decreasing.
    pub fn from_steps(ends: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if ends.len() != levels.len() {
            return Err(Error::InvalidParameter("ends and levels differ in length".into()));
        }
        let mut prev_s = 0.0;
        let mut prev_v = f64::INFINITY;
        let mut cumulative = Vec::with_capacity(ends.len());
        let mut mass = 0.0;
        for (&s, &v) in ends.iter().zip(&levels) {
            if !(s > prev_s && v < prev_v && v > 0.0 && v.is_finite() && s.is_finite()) {
                return Err(Error::InvalidParameter(
                    "steps need increasing ends and strictly decreasing positive levels".into(),
                ));
            }
            mass += v * (s - prev_s);
            cumulative.push(mass);
            prev_s = s;
            prev_v = v;
        }
        Ok(Self { ends, levels, cumulative })
    }

    pub fn ends(&self) -> &[f64] {
        &self.ends
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Measure of the support, `s_K`.
    pub fn total_measure(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn max_level(&self) -> f64 {
        self.levels.first().copied().unwrap_or(0.0)
    }

    /// Start of segment `k`.
    pub fn start(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.ends[k - 1]
        }
    }

    fn cumulative_before(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Index of the segment `[s_{k-1}, s_k)` containing `s`, or `len()` beyond the support.
    fn segment(&self, s: f64) -> usize {
        self.ends.partition_point(|&e| e <= s)
    }

    pub fn f_star(&self, s: f64) -> f64 {
        let k = self.segment(s);
        if k < self.len() {
            self.levels[k]
        } else {
            0.0
        }
    }

    /// `∫_0^s f*`.
    pub fn cumulative_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let k = self.segment(s);
        if k >= self.len() {
            return self.total_mass();
        }
        self.cumulative_before(k) + self.levels[k] * (s - self.start(k))
    }

    /// `f**(s) = (1/s) ∫_0^s f*`.
    pub fn f_star_star(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!("f** needs s > 0, got {s}")));
        }
        Ok(self.cumulative_at(s) / s)
    }

    /// Coefficients `(a, b)` with `∫_0^τ f* = a + b τ` on segment `k`
    /// (`k = len()` is the tail beyond the support).
    pub fn affine_cumulative(&self, k: usize) -> (f64, f64) {
        if k >= self.len() {
            (self.total_mass(), 0.0)
        } else {
            let v = self.levels[k];
            (self.cumulative_before(k) - v * self.start(k), v)
        }
    }

    /// Profile of `|f|^q`, whose rearrangement is `(f*)^q` on the same breakpoints.
    pub fn power(&self, q: f64) -> StepProfile {
        let levels: Vec<f64> = self.levels.iter().map(|v| v.powf(q)).collect();
        let mut cumulative = Vec::with_capacity(levels.len());
        let mut mass = 0.0;
        for (k, v) in levels.iter().enumerate() {
            mass += v * (self.ends[k] - self.start(k));
            cumulative.push(mass);
        }
        StepProfile { ends: self.ends.clone(), levels, cumulative }
    }

    /// `‖f*‖_{L^r(0,∞)}`.
    pub fn lr_norm(&self, r: f64) -> f64 {
        if r.is_infinite() {
            return self.max_level();
        }
        let mut sum = 0.0;
        for k in 0..self.len() {
            sum += self.levels[k].powf(r) * (self.ends[k] - self.start(k));
        }
        sum.powf(1.0 / r)
    }

    /// All breakpoints plus segment midpoints.
    pub fn candidate_grid(&self) -> Vec<f64> {
        let mut grid = Vec::with_capacity(2 * self.len());
        for k in 0..self.len() {
            grid.push(0.5 * (self.start(k) + self.ends[k]));
            grid.push(self.ends[k]);
        }
        grid
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s_k,v_k,cumulative_k")?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{},{},{}",
                fmt_f64(self.ends[k]),
                fmt_f64(self.levels[k]),
                fmt_f64(self.cumulative[k])
            )?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<StepProfile> {
        let mut ends = Vec::new();
        let mut levels = Vec::new();
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Format(format!("expected 3 columns in `{line}`")));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad number `{s}`: {e}")))
            };
            ends.push(parse(cols[0])?);
            levels.push(parse(cols[1])?);
        }
        StepProfile::from_steps(ends, levels)
    }
}

pub fn rearrange(field: &Field) -> StepProfile {
    StepProfile::from_values(field.values(), field.geometry().cell_volume())
}

/// `μ_f(λ) = h^N #{cells with value > λ}`.
pub fn distribution_function(field: &Field, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("distribution function needs λ > 0, got {lambda}")));
    }
    let count = field.values().iter().filter(|v| **v > lambda).count();
    Ok(count as f64 * field.geometry().cell_volume())
}

/// Result of checking `LHS(s) ≤ RHS(s)` over an s-grid.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub evaluations: usize,
    /// `max_s (LHS − RHS)`; non-positive when the inequality holds exactly.
    pub max_violation: f64,
    pub scale: f64,
    pub holds: bool,
}

impl InequalityReport {
    pub fn from_pairs(name: &str, pairs: impl IntoIterator<Item = (f64, f64)>, rel_tol: f64) -> Self {
        let mut max_violation = f64::NEG_INFINITY;
        let mut scale: f64 = 0.0;
        let mut evaluations = 0;
        for (lhs, rhs) in pairs {
            evaluations += 1;
            max_violation = max_violation.max(lhs - rhs);
            scale = scale.max(lhs.abs()).max(rhs.abs());
        }
        if evaluations == 0 {
            max_violation = 0.0;
        }
        let holds = max_violation.is_finite() && max_violation <= rel_tol * scale;
        Self { name: name.to_string(), evaluations, max_violation, scale, holds }
    }

    pub fn relative_violation(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_violation.max(0.0) / self.scale
        } else {
            0.0
        }
    }
}

fn merged_grid(profiles: &[&StepProfile]) -> Vec<f64> {
    let mut grid: Vec<f64> = profiles.iter().flat_map(|p| p.candidate_grid()).collect();
    grid.retain(|s| *s > 0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `∫_l^r (a1 + b1 τ)(a2 + b2 τ) / τ² dτ`.
fn affine_product_integral(a1: f64, b1: f64, a2: f64, b2: f64, l: f64, r: f64) -> f64 {
    let mut out = 0.0;
    if a1 != 0.0 && a2 != 0.0 {
        out += a1 * a2 * (1.0 / l - 1.0 / r);
    }
    let cross = a1 * b2 + a2 * b1;
    if cross != 0.0 {
        out += cross * (r / l).ln();
    }
    out + b1 * b2 * (r - l)
}

/// `∫_s^∞ f1**(τ) f2**(τ) dτ`, exact for step profiles.
pub fn oneil_rhs(p1: &StepProfile, p2: &StepProfile, s: f64) -> f64 {
    if p1.is_empty() || p2.is_empty() {
        return 0.0;
    }
    let mut breaks: Vec<f64> = p1.ends.iter().chain(&p2.ends).copied().filter(|e| *e > s).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    let mut left = s;
    for &right in &breaks {
        let mid = 0.5 * (left + right);
        let (a1, b1) = p1.affine_cumulative(p1.segment(mid));
        let (a2, b2) = p2.affine_cumulative(p2.segment(mid));
        total += affine_product_integral(a1, b1, a2, b2, left, right);
        left = right;
    }
    // beyond both supports f_i** = m_i / τ
    total + p1.total_mass() * p2.total_mass() / left
}

/// Step profile of the product `f1* f2*` (non-increasing as a product of such).
pub fn product_of_rearrangements(p1: &StepProfile, p2: &StepProfile) -> StepProfile {
    let mut breaks: Vec<f64> = p1.ends.iter().chain(&p2.ends).copied().collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut ends = Vec::new();
    let mut levels: Vec<f64> = Vec::new();
    let mut left = 0.0;
    for &right in &breaks {
        let mid = 0.5 * (left + right);
        let v = p1.f_star(mid) * p2.f_star(mid);
        left = right;
        if v <= 0.0 {
            break;
        }
        if levels.last() == Some(&v) {
            *ends.last_mut().unwrap() = right;
        } else {
            levels.push(v);
            ends.push(right);
        }
    }
    let mut cumulative = Vec::with_capacity(levels.len());
    let mut mass = 0.0;
    let mut start = 0.0;
    for (e, v) in ends.iter().zip(&levels) {
        mass += v * (e - start);
        cumulative.push(mass);
        start = *e;
    }
    StepProfile { ends, levels, cumulative }
}

/// Checks `(f1 ∗ f2)**(s) ≤ ∫_s^∞ f1** f2** dτ` using the periodic grid convolution.
pub fn convolve_rearranged_bound_check(
    f1: &Field,
    f2: &Field,
    s_grid: Option<&[f64]>,
) -> Result<InequalityReport> {
    if f1.geometry() != f2.geometry() {
        return Err(Error::GeometryMismatch);
    }
    let geometry = f1.geometry();
    let conv = spectral::convolve(geometry, f1.values(), f2.values());
    let lhs = StepProfile::from_values(&conv, geometry.cell_volume());
    let p1 = rearrange(f1);
    let p2 = rearrange(f2);
    let grid = match s_grid {
        Some(g) => g.to_vec(),
        None => merged_grid(&[&lhs, &p1, &p2]),
    };
    let pairs = grid
        .iter()
        .map(|&s| Ok((lhs.f_star_star(s)?, oneil_rhs(&p1, &p2, s))))
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::from_pairs("oneil_convolution", pairs, 1e-10))
}

/// Checks `(f1 f2)**(s) ≤ (1/s) ∫_0^s f1* f2*`.
pub fn product_bound_check(f1: &Field, f2: &Field, s_grid: Option<&[f64]>) -> Result<InequalityReport> {
    let prod = f1.mul(f2)?;
    let lhs = rearrange(&prod);
    let rhs = product_of_rearrangements(&rearrange(f1), &rearrange(f2));
    let grid = match s_grid {
        Some(g) => g.to_vec(),
        None => merged_grid(&[&lhs, &rhs]),
    };
    let pairs = grid
        .iter()
        .map(|&s| Ok((lhs.f_star_star(s)?, rhs.f_star_star(s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::from_pairs("product_rearrangement", pairs, 1e-10))
}
