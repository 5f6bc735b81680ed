//! Scalar root finding: Newton with a bisection fallback.

use crate::error::{Error, Result};

/// Absolute residual tolerance.
pub const NEWTON_TOL: f64 = 1e-12;
/// Newton iterations before falling back to bisection.
pub const NEWTON_MAX_ITER: usize = 50;

/// Solves `f(u) = 0` starting from `seed`. If Newton does not reach
/// `|f| ≤ NEWTON_TOL`, bisects on `[seed - width/2, seed + width/2]`.
pub fn newton_bisect(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, seed: f64, width: f64) -> Result<f64> {
    let mut u = seed;
    for _ in 0..NEWTON_MAX_ITER {
        let r = f(u);
        if r.abs() <= NEWTON_TOL {
            return Ok(u);
        }
        let d = df(u);
        if !(d.is_finite() && d != 0.0) {
            break;
        }
        let next = u - r / d;
        if !next.is_finite() {
            break;
        }
        u = next;
    }
    if f(u).abs() <= NEWTON_TOL {
        return Ok(u);
    }
    bisect(&f, seed - 0.5 * width, seed + 0.5 * width)
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return Err(Error::NewtonFailure(format!(
            "no sign change on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() <= NEWTON_TOL || hi - lo <= f64::EPSILON * mid.abs().max(1e-300) {
            return Ok(mid);
        }
        if fm * flo > 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_newton_cubic() {
        let u = newton_bisect(|u| u * u * u - 2.0, |u| 3.0 * u * u, 1.0, 2.0).unwrap();
        assert!((u - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn test_bisection_fallback() {
        // zero derivative at the seed forces the fallback
        let u = newton_bisect(|u| u * u * u - 0.001, |u| 3.0 * u * u, 0.0, 1.0).unwrap();
        assert!((u - 0.1).abs() < 1e-9);
    }

    #[test]
    fn test_no_root() {
        assert!(newton_bisect(|u| u * u + 1.0, |_| 0.0, 0.0, 1.0).is_err());
    }
}
