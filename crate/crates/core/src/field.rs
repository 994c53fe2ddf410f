//! Scalar fields on a uniform periodic grid over `[-L, L]^N`.
//!
//! Grid points sit at `x_j = -L + j h` with `h = 2L/M`, so the origin is the
//! center of cell `M/2` on every axis. Values are stored row-major with the
//! last axis varying fastest. Every cell is an atom of measure `h^N`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Geometry of the truncated periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    dim: usize,
    half_width: f64,
    cells: usize,
}

impl GridGeometry {
    pub fn new(dim: usize, half_width: f64, cells: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Geometry(format!("dimension N={dim} must be 1, 2 or 3")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Geometry(format!("half width L={half_width} must be positive")));
        }
        if cells < 8 || !cells.is_power_of_two() {
            return Err(Error::Geometry(format!(
                "cells per axis M={cells} must be a power of two and at least 8"
            )));
        }
        let total = (cells as u128).pow(dim as u32);
        if total > (1u128 << 28) {
            return Err(Error::SizeGuard(format!("M^N = {total} cells is too large")));
        }
        Ok(Self { dim, half_width, cells })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of cells `M^N`.
    pub fn len(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of the whole box, `(2L)^N`.
    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    /// Coordinate of grid index `j` along any axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Multi-index of a flat index (unused trailing axes are zero).
    pub fn unflatten(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.cells;
            idx /= self.cells;
        }
        out
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        multi[..self.dim]
            .iter()
            .fold(0usize, |acc, &j| acc * self.cells + j)
    }

    /// Cell center of a flat index.
    pub fn center(&self, idx: usize) -> [f64; 3] {
        let m = self.unflatten(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coordinate(m[a]);
        }
        x
    }

    /// Euclidean distance of a cell center from the origin.
    pub fn radius(&self, idx: usize) -> f64 {
        let x = self.center(idx);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Flat index of the cell whose center is the origin.
    pub fn origin_index(&self) -> usize {
        self.flatten(&[self.cells / 2; 3])
    }

    /// Index of `idx` translated by a signed per-axis offset (periodic wrap).
    pub fn shifted(&self, idx: usize, offset: &[isize; 3]) -> usize {
        let m = self.unflatten(idx);
        let cells = self.cells as isize;
        let mut out = [0usize; 3];
        for a in 0..self.dim {
            out[a] = (m[a] as isize + offset[a]).rem_euclid(cells) as usize;
        }
        self.flatten(&out)
    }

    /// Signed cell offsets whose minimal-image length is strictly below `radius`,
    /// with their lengths, sorted by length (ties in lexicographic offset order).
    pub fn ball_offsets(&self, radius: f64) -> Vec<([isize; 3], f64)> {
        let h = self.spacing();
        let half = (self.cells / 2) as isize;
        let reach = (radius / h).ceil() as isize;
        // Offsets -half+1 ..= half cover every residue exactly once.
        let lo = (-reach).max(-half + 1);
        let hi = reach.min(half);
        let range: Vec<isize> = (lo..=hi).collect();
        let mut out = Vec::new();
        let axes = self.dim;
        let mut push = |o: [isize; 3]| {
            let d2: f64 = (0..axes).map(|a| (o[a] as f64 * h).powi(2)).sum();
            let d = d2.sqrt();
            if d < radius {
                out.push((o, d));
            }
        };
        match axes {
            1 => {
                for &i in &range {
                    push([i, 0, 0]);
                }
            }
            2 => {
                for &i in &range {
                    for &j in &range {
                        push([i, j, 0]);
                    }
                }
            }
            _ => {
                for &i in &range {
                    for &j in &range {
                        for &k in &range {
                            push([i, j, k]);
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }
}

/// A non-negative scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl Field {
    /// Checked constructor: values must be finite and non-negative.
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                geometry.len(),
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidField(format!("value {v} at cell {i} is not finite and non-negative")));
        }
        Ok(Self { geometry, values })
    }

    pub(crate) fn from_raw(geometry: GridGeometry, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), geometry.len());
        Self { geometry, values }
    }

    pub fn zeros(geometry: GridGeometry) -> Self {
        Self { geometry, values: vec![0.0; geometry.len()] }
    }

    pub fn constant(geometry: GridGeometry, c: f64) -> Result<Self> {
        Self::new(geometry, vec![c; geometry.len()])
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(geometry: GridGeometry, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let n = geometry.dim();
        let values = (0..geometry.len())
            .map(|i| f(&geometry.center(i)[..n]))
            .collect();
        Self::new(geometry, values)
    }

    /// A single cell carrying total mass `mass` (near-Dirac bump).
    pub fn point_mass(geometry: GridGeometry, index: usize, mass: f64) -> Result<Self> {
        let mut values = vec![0.0; geometry.len()];
        values[index] = mass / geometry.cell_volume();
        Self::new(geometry, values)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `h^N Σ values`, summed in lexicographic cell order.
    pub fn integral(&self) -> f64 {
        let mut sum = 0.0;
        for v in &self.values {
            sum += v;
        }
        sum * self.geometry.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Largest center radius `|x|` over cells with positive value (0 for the zero field).
    pub fn support_radius(&self) -> f64 {
        (0..self.geometry.len())
            .filter(|&i| self.values[i] > 0.0)
            .map(|i| self.geometry.radius(i))
            .fold(0.0, f64::max)
    }

    pub fn lp_norm(&self, r: f64) -> f64 {
        if r.is_infinite() {
            return self.max();
        }
        let mut sum = 0.0;
        for v in &self.values {
            sum += v.powf(r);
        }
        (sum * self.geometry.cell_volume()).powf(1.0 / r)
    }

    pub fn pointwise_power(&self, exponent: f64) -> Field {
        let values = self.values.iter().map(|v| v.powf(exponent)).collect();
        Field::from_raw(self.geometry, values)
    }

    pub fn scale(&self, k: f64) -> Result<Field> {
        Field::new(self.geometry, self.values.iter().map(|v| k * v).collect())
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Field::new(self.geometry, values)
    }

    /// Maximum of `|self - other|` over cells.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Cyclic translation by a whole number of cells per axis.
    pub fn translate(&self, offset: &[isize; 3]) -> Field {
        let mut values = vec![0.0; self.values.len()];
        for (i, v) in self.values.iter().enumerate() {
            values[self.geometry.shifted(i, offset)] = *v;
        }
        Field::from_raw(self.geometry, values)
    }

    /// Same values reinterpreted on a box of a different half width.
    pub fn with_half_width(&self, half_width: f64) -> Result<Field> {
        let geometry = GridGeometry::new(self.geometry.dim, half_width, self.geometry.cells)?;
        Ok(Field::from_raw(geometry, self.values.clone()))
    }
}

/// A radial profile `f(|x|)` defined for `r > 0`.
pub trait RadialProfile {
    fn value(&self, r: f64) -> f64;

    /// Leading singular behavior near 0 as `r^{-a} log(1/r)^{-b}`.
    fn singularity(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    /// Exact average over the origin cell, when a closed form exists.
    fn origin_cell_average(&self, _geometry: &GridGeometry) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64> RadialProfile for F {
    fn value(&self, r: f64) -> f64 {
        self(r)
    }
}

/// `c r^{-a} [log(e + 1/r)]^{-b} [log(e + log(e + 1/r))]^{-b2}` on `r < support`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLogProfile {
    pub coefficient: f64,
    pub power: f64,
    pub log_power: f64,
    pub iterated_log_power: f64,
    pub support: f64,
}

impl PowerLogProfile {
    pub fn power(coefficient: f64, power: f64, support: f64) -> Self {
        Self { coefficient, power, log_power: 0.0, iterated_log_power: 0.0, support }
    }

    pub fn indicator(support: f64) -> Self {
        Self::power(1.0, 0.0, support)
    }

    pub fn with_log(mut self, log_power: f64) -> Self {
        self.log_power = log_power;
        self
    }

    pub fn with_iterated_log(mut self, power: f64) -> Self {
        self.iterated_log_power = power;
        self
    }

    fn shape(&self, r: f64) -> f64 {
        let mut v = r.powf(-self.power);
        if self.log_power != 0.0 || self.iterated_log_power != 0.0 {
            let l = ln_e_plus_inv(r);
            if self.log_power != 0.0 {
                v *= l.powf(-self.log_power);
            }
            if self.iterated_log_power != 0.0 {
                v *= (std::f64::consts::E + l).ln().powf(-self.iterated_log_power);
            }
        }
        v
    }
}

/// `log(e + 1/r)` evaluated without overflow for tiny `r`.
pub fn ln_e_plus_inv(r: f64) -> f64 {
    if r < 1e-8 {
        -r.ln() + (std::f64::consts::E * r).ln_1p()
    } else {
        (std::f64::consts::E + 1.0 / r).ln()
    }
}

impl RadialProfile for PowerLogProfile {
    fn value(&self, r: f64) -> f64 {
        if r >= self.support || self.coefficient == 0.0 {
            0.0
        } else {
            self.coefficient * self.shape(r)
        }
    }

    fn singularity(&self) -> (f64, f64) {
        (self.power, self.log_power)
    }

    fn origin_cell_average(&self, geometry: &GridGeometry) -> Option<f64> {
        if self.log_power != 0.0 || self.iterated_log_power != 0.0 || self.power >= 1.0 {
            return None;
        }
        let half = 0.5 * geometry.spacing();
        if geometry.dim() != 1 || self.support < half {
            return None;
        }
        // (1/h) ∫_{-h/2}^{h/2} c|x|^{-a} dx = (2/h) c (h/2)^{1-a} / (1-a)
        let a = self.power;
        Some(2.0 / geometry.spacing() * self.coefficient * half.powf(1.0 - a) / (1.0 - a))
    }
}

/// How the cell containing the origin is filled by [`sample_radial_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginRule {
    /// Exact cell average (preserves the local mass).
    #[default]
    CellAverage,
    /// Profile value at the radius of the ball with the cell's volume, which
    /// keeps the sampled level sets equimeasurable with the profile's.
    EqualVolumeRadius,
}

/// Samples a radial profile: the origin cell receives its cell average, all
/// other cells the value at their center.
pub fn sample_radial(geometry: &GridGeometry, profile: &dyn RadialProfile) -> Result<Field> {
    sample_radial_with(geometry, profile, OriginRule::CellAverage)
}

pub fn sample_radial_with(geometry: &GridGeometry, profile: &dyn RadialProfile, rule: OriginRule) -> Result<Field> {
    let n = geometry.dim() as f64;
    let (a, b) = profile.singularity();
    if a > n || (a == n && b <= 1.0) {
        return Err(Error::NonIntegrable(format!(
            "profile r^(-{a}) log^(-{b}) is not integrable near 0 in dimension {n}: needs power < N, or power = N with log power > 1"
        )));
    }
    let origin = geometry.origin_index();
    let mut values = Vec::with_capacity(geometry.len());
    for i in 0..geometry.len() {
        if i == origin {
            values.push(0.0);
        } else {
            values.push(profile.value(geometry.radius(i)));
        }
    }
    let v0 = match rule {
        OriginRule::CellAverage => match profile.origin_cell_average(geometry) {
            Some(v) => v,
            None => origin_cell_quadrature(geometry, profile)?,
        },
        OriginRule::EqualVolumeRadius => {
            let r = (geometry.cell_volume() / unit_ball_volume(geometry.dim())).powf(1.0 / n);
            profile.value(r)
        }
    };
    if !v0.is_finite() {
        return Err(Error::NonIntegrable("origin cell average diverges".into()));
    }
    values[origin] = v0;
    Field::new(*geometry, values)
}

/// `ω_N = |B(0,1)|`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI / 3.0,
    }
}

/// Average of a radial profile over the origin cell `[-a, a]^N`, `a = h/2`.
///
/// By symmetry the cube splits into `N!·2^N` congruent pieces on which the ray
/// from the origin leaves through one face, at length `a / cos θ`. Along each
/// ray the radial integral `G(ρ) = ∫_0^ρ f(r) r^{N-1} dr` is computed once up to
/// `a` (where the singularity lives) and extended by smooth panels.
fn origin_cell_quadrature(geometry: &GridGeometry, profile: &dyn RadialProfile) -> Result<f64> {
    let a = 0.5 * geometry.spacing();
    let dim = geometry.dim();
    let f = |r: f64| if r > 0.0 { profile.value(r) } else { 0.0 };
    let radial = |r: f64| f(r) * r.powi(dim as i32 - 1);
    let g_a = quad::integrate_relative(radial, 0.0, a, 1e-13)?;
    if dim == 1 {
        return Ok(g_a / a);
    }
    let g = |rho: f64| -> f64 {
        if rho <= a {
            return g_a;
        }
        g_a + quad::integrate_relative(radial, a, rho, 1e-13).unwrap_or(f64::NAN)
    };
    let quarter = std::f64::consts::FRAC_PI_4;
    let total = if dim == 2 {
        // [0,a]^2 = two triangles; inside each the ray exits at a / cos θ
        2.0 * quad::integrate_relative(|t: f64| g(a / t.cos()), 0.0, quarter, 1e-12)?
    } else {
        // octant = six pieces {z largest, x ≥ y}; dω = sin θ dθ dφ
        let inner = |phi: f64| {
            let top = (1.0 / phi.cos()).atan();
            quad::integrate_relative(|t: f64| g(a / t.cos()) * t.sin(), 0.0, top, 1e-12).unwrap_or(f64::NAN)
        };
        6.0 * quad::integrate_relative(inner, 0.0, quarter, 1e-12)?
    };
    let total = total / a.powi(dim as i32);
    if !total.is_finite() {
        return Err(Error::Quadrature("origin cell quadrature failed".into()));
    }
    Ok(total)
}

const MAGIC: &[u8; 4] = b"SLFD";

impl Field {
    /// Binary layout: `SLFD`, u32 N, f64 L, u64 M, then `M^N` f64 values (all little endian).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.geometry.dim as u32).to_le_bytes())?;
        w.write_all(&self.geometry.half_width.to_le_bytes())?;
        w.write_all(&(self.geometry.cells as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Field> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("missing SLFD magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let half_width = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let cells = u64::from_le_bytes(b8) as usize;
        let geometry = GridGeometry::new(dim, half_width, cells)?;
        let mut values = Vec::with_capacity(geometry.len());
        for _ in 0..geometry.len() {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        Field::new(geometry, values)
    }

    /// CSV layout: header `# field N=<N> L=<L> M=<M>`, then one value per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# field N={} L={} M={}",
            self.geometry.dim,
            crate::report::fmt_f64(self.geometry.half_width),
            self.geometry.cells
        )?;
        for v in &self.values {
            writeln!(w, "{}", crate::report::fmt_f64(*v))?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Field> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty field CSV".into()))?;
        let mut dim = None;
        let mut half_width = None;
        let mut cells = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = tok.strip_prefix("N=") {
                dim = v.parse::<usize>().ok();
            } else if let Some(v) = tok.strip_prefix("L=") {
                half_width = v.parse::<f64>().ok();
            } else if let Some(v) = tok.strip_prefix("M=") {
                cells = v.parse::<usize>().ok();
            }
        }
        let (Some(dim), Some(half_width), Some(cells)) = (dim, half_width, cells) else {
            return Err(Error::Format(format!("bad field header `{header}`")));
        };
        let geometry = GridGeometry::new(dim, half_width, cells)?;
        let values = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad value `{l}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Field::new(geometry, values)
    }

    /// Reads a field file, choosing the format from the magic bytes.
    pub fn load(path: &Path) -> Result<Field> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(MAGIC) {
            Field::read_binary(&bytes[..])
        } else {
            Field::read_csv(&bytes[..])
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        if path.extension().is_some_and(|e| e == "csv") {
            self.write_csv(file)
        } else {
            self.write_binary(file)
        }
    }
}
