//! Adaptive quadrature: tanh-sinh panels with recursive bisection.

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 24;

/// Integrates `f` over `[a, b]` to absolute accuracy `abs_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite interval [{a}, {b}]")));
    }
    panel(&f, a, b, abs_tol.max(f64::MIN_POSITIVE), 0)
}

fn panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64> {
    let out = quadrature::integrate(f, a, b, tol);
    if !out.integral.is_finite() {
        return Err(Error::Quadrature(format!("non-finite value on [{a:e}, {b:e}]")));
    }
    // below a few ulps of the panel value, bisection cannot improve things
    let floor = 64.0 * f64::EPSILON * out.integral.abs();
    if out.error_estimate <= tol.max(floor) || depth >= MAX_DEPTH {
        return Ok(out.integral);
    }
    let m = 0.5 * (a + b);
    Ok(panel(f, a, m, 0.5 * tol, depth + 1)? + panel(f, m, b, 0.5 * tol, depth + 1)?)
}

/// Integrates to relative accuracy `rel_tol`, using a coarse pass to set the scale.
pub fn integrate_relative(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let coarse = quadrature::integrate(&f, a, b, 1e-6).integral.abs();
    if coarse == 0.0 {
        return integrate(&f, a, b, f64::MIN_POSITIVE);
    }
    integrate(&f, a, b, rel_tol * coarse)
}

/// Integrates over `[a, b]` split at geometric points `a·ratio^k`, for
/// integrands varying over many decades (`0 < a < b`).
pub fn integrate_geometric(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a > 0.0 && b > a) {
        return Err(Error::Quadrature(format!("geometric split needs 0 < a < b, got [{a}, {b}]")));
    }
    // substitute τ = e^y so each decade has equal weight
    let g = |y: f64| {
        let t = y.exp();
        f(t) * t
    };
    let (ya, yb) = (a.ln(), b.ln());
    let pieces = ((yb - ya) / std::f64::consts::LN_2).ceil().max(1.0) as usize;
    let step = (yb - ya) / pieces as f64;
    let mut parts = Vec::with_capacity(pieces);
    for k in 0..pieces {
        let lo = ya + k as f64 * step;
        let hi = if k + 1 == pieces { yb } else { lo + step };
        parts.push(integrate_relative(g, lo, hi, rel_tol)?);
    }
    Ok(parts.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate_relative(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn many_decades() {
        // ∫_{1e-8}^{1e4} dτ/τ = ln(1e12)
        let v = integrate_geometric(|t: f64| 1.0 / t, 1e-8, 1e4, 1e-12).unwrap();
        assert!((v - 1e12f64.ln()).abs() < 1e-9);
    }
}
