//! Numerical integration helpers used by the state oracle and its checks.
//!
//! Panels are integrated with the double-exponential rule from the
//! `quadrature` crate; this module only handles the panel layout, the
//! semi-infinite tail, and the error bookkeeping.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

const MAX_PANELS: usize = 4096;

/// Integrates `f` over `[a, b]` split into `panels` equal pieces.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rel_tol: f64) -> Result<f64> {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let coarse = sum_panels(&f, a, width, panels, 1e-6)?.0;
    let target = (rel_tol * coarse.abs()).max(f64::MIN_POSITIVE) / panels as f64;
    let (value, err) = sum_panels(&f, a, width, panels, target)?;
    if err > rel_tol * value.abs().max(f64::MIN_POSITIVE) * 10.0 {
        return Err(Error::OraclePrecision(format!(
            "quadrature on [{a}, {b}] reached error {err:.3e} for value {value:.6e}"
        )));
    }
    Ok(value)
}

/// Integrates `f` over `[0, ∞)` using unit-width panels, stopping once the
/// tail panels are negligible relative to the accumulated total.
pub fn integrate_half_line(f: impl Fn(f64) -> f64, panel_width: f64, rel_tol: f64) -> Result<f64> {
    // first pass: find where the integrand has died off
    let mut total = 0.0f64;
    let mut quiet = 0;
    let mut panels = 0;
    while panels < MAX_PANELS {
        let a = panels as f64 * panel_width;
        let v = quadrature::integrate(&f, a, a + panel_width, 1e-6).integral;
        total += v.abs();
        panels += 1;
        if total > 0.0 && v.abs() < 1e-18 * total {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if panels == MAX_PANELS {
        return Err(Error::OraclePrecision("integrand tail does not decay".into()));
    }
    integrate(f, 0.0, panels as f64 * panel_width, panels, rel_tol)
}

fn sum_panels(f: &impl Fn(f64) -> f64, a: f64, width: f64, panels: usize, target: f64) -> Result<(f64, f64)> {
    let mut acc = CompensatedSum::new();
    let mut err = 0.0;
    for i in 0..panels {
        let lo = a + i as f64 * width;
        let out = quadrature::integrate(f, lo, lo + width, target);
        if !out.integral.is_finite() {
            return Err(Error::OraclePrecision(format!("non-finite integral on panel {i}")));
        }
        acc.add(out.integral);
        err += out.error_estimate;
    }
    Ok((acc.value(), err))
}

/// Mean of a 2π-periodic function over one period (trapezoid rule, which
/// converges geometrically for analytic periodic integrands). The node
/// count doubles until successive estimates agree to `rel_tol` or 2^16
/// nodes are reached.
pub fn periodic_mean(f: impl Fn(f64) -> f64, rel_tol: f64) -> f64 {
    let mut n = 32usize;
    let mut prev = trapezoid(&f, n);
    while n < (1 << 16) {
        n *= 2;
        let cur = trapezoid(&f, n);
        if (cur - prev).abs() <= rel_tol * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

fn trapezoid(f: &impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|i| f(i as f64 * h)).collect::<CompensatedSum>().value() / n as f64
}
