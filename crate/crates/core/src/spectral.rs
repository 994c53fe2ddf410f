//! N-dimensional FFT driver over row-major grids, plus discrete wave numbers.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::GridGeometry;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plan_cache() -> &'static RwLock<HashMap<usize, PlanPair>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, PlanPair>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn plans(len: usize) -> PlanPair {
    if let Some(p) = plan_cache().read().expect("fft plan cache poisoned").get(&len) {
        return p.clone();
    }
    let mut planner = FftPlanner::new();
    let pair: PlanPair = (planner.plan_fft_forward(len), planner.plan_fft_inverse(len));
    plan_cache()
        .write()
        .expect("fft plan cache poisoned")
        .entry(len)
        .or_insert(pair)
        .clone()
}

/// In-place unnormalized transform along every axis.
fn transform(geometry: &GridGeometry, data: &mut [Complex64], inverse: bool) {
    let m = geometry.cells_per_axis();
    let n = geometry.dim();
    let (fwd, inv) = plans(m);
    let plan = if inverse { inv } else { fwd };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    // last axis is contiguous
    plan.process_with_scratch(data, &mut scratch);
    if n == 1 {
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..n - 1 {
        let stride = m.pow((n - 1 - axis) as u32);
        let block = stride * m;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (k, slot) in line.iter().enumerate() {
                    data[base + k * stride] = *slot;
                }
            }
        }
    }
}

pub fn forward(geometry: &GridGeometry, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(geometry, &mut data, false);
    data
}

/// Inverse transform, normalized, returning real parts.
pub fn inverse(geometry: &GridGeometry, mut spectrum: Vec<Complex64>) -> Vec<f64> {
    transform(geometry, &mut spectrum, true);
    let scale = 1.0 / geometry.len() as f64;
    spectrum.iter().map(|c| c.re * scale).collect()
}

/// `|ξ_k|²` for every flat index, with `ξ = π k / L` and signed `k`.
pub fn wave_numbers_squared(geometry: &GridGeometry) -> Vec<f64> {
    let m = geometry.cells_per_axis();
    let l = geometry.half_width();
    let axis: Vec<f64> = (0..m)
        .map(|k| {
            let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
            let xi = std::f64::consts::PI * kk / l;
            xi * xi
        })
        .collect();
    (0..geometry.len())
        .map(|i| {
            let idx = geometry.unflatten(i);
            (0..geometry.dim()).map(|a| axis[idx[a]]).sum()
        })
        .collect()
}

/// Periodic convolution `(f ∗ g)(x_i) = h^N Σ_j f(x_i − x_j) g(x_j)` with
/// negative round-off clamped to zero.
pub fn convolve(geometry: &GridGeometry, f: &[f64], g: &[f64]) -> Vec<f64> {
    let a = forward(geometry, f);
    let b = forward(geometry, g);
    let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    let raw = inverse(geometry, prod);
    // x_i - x_j sits at index (i - j) + M/2, so the cyclic result is shifted by M/2
    let m = geometry.cells_per_axis();
    let half = (m / 2) as isize;
    let shift = [half, half, half];
    let h_n = geometry.cell_volume();
    let mut out = vec![0.0; raw.len()];
    for (i, v) in raw.iter().enumerate() {
        out[geometry.shifted(i, &shift)] = (v * h_n).max(0.0);
    }
    out
}
