//! Sign-change scanning and bisection for scalar functions without poles.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;

/// Bisects `f` on `[lo, hi]`, which must bracket a sign change, until the
/// bracket is narrower than `x_tol` or collapses to adjacent floats.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Walks `f` from `start` in increments of `step` and returns the brackets
/// `[a, b]` in which the sign changes, stopping after `max_brackets` brackets
/// or when `end` is reached. Exact zeros on grid points produce a degenerate
/// bracket `[x, x]`.
pub fn scan_sign_changes(
    f: impl Fn(f64) -> f64,
    start: f64,
    end: f64,
    step: f64,
    max_brackets: usize,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if !(step > 0.0) || end <= start {
        return out;
    }
    let n_steps = ((end - start) / step).ceil() as usize;
    let mut x_prev = start;
    let mut f_prev = f(start);
    for k in 1..=n_steps {
        let x = (start + k as f64 * step).min(end);
        let fx = f(x);
        if fx == 0.0 {
            out.push((x, x));
        } else if f_prev != 0.0 && fx.signum() != f_prev.signum() {
            out.push((x_prev, x));
        }
        if out.len() >= max_brackets {
            break;
        }
        x_prev = x;
        f_prev = fx;
    }
    out
}
