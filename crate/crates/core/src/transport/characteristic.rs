//! Backward characteristics, entrance times and their derivatives.

use crate::error::{Error, Result};

use super::coefficient::{Coefficient, Direction};

/// Which part of the data determines the solution at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum EntranceClass {
    /// Initial data: the characteristic reaches `s = 0` inside the domain.
    I,
    /// Boundary data: the characteristic enters through the inflow boundary.
    J,
    /// The corner characteristic through `(0, inflow)`.
    P,
}

/// One backward characteristic through `(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicRecord {
    pub entrance_time: f64,
    pub class: EntranceClass,
    /// `φ(0, t, x)` for classes I and P, the inflow point for J.
    pub foot: f64,
    /// `(s, φ(s, t, x))` from `s = t` down to the entrance time.
    pub path: Vec<(f64, f64)>,
}

/// Outcome of tracing a characteristic backward to a stopping time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Exit {
    /// Crossed the inflow boundary at this time.
    Boundary(f64),
    /// Reached the stopping time at this reduced position.
    Reached(f64),
}

#[inline]
fn rk4_back(a: &Coefficient, s: f64, xi: f64, h: f64) -> f64 {
    let k1 = a.reduced(s, xi);
    let k2 = a.reduced(s - 0.5 * h, xi - 0.5 * h * k1);
    let k3 = a.reduced(s - 0.5 * h, xi - 0.5 * h * k2);
    let k4 = a.reduced(s - h, xi - h * k3);
    xi - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Rejects steps that could jump over the inflow boundary unseen.
pub(crate) fn check_step(a: &Coefficient, step: f64) -> Result<()> {
    let bound = a.resolution() / a.sup_norm();
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidDomain(format!(
            "integration step must be positive, got {step}"
        )));
    }
    if step > bound * (1.0 + 1e-9) {
        return Err(Error::StepTooLarge { step, bound });
    }
    Ok(())
}

/// Largest admissible step for `a`.
pub fn default_step(a: &Coefficient) -> f64 {
    a.resolution() / a.sup_norm()
}

/// Traces the reduced characteristic backward from `(t, xi)` to `s_stop`
/// with equal RK4 substeps no longer than `step`.
pub(crate) fn trace_to(
    a: &Coefficient,
    t: f64,
    xi: f64,
    s_stop: f64,
    step: f64,
    mut path: Option<&mut Vec<(f64, f64)>>,
) -> Exit {
    if xi <= 0.0 && t > s_stop {
        return Exit::Boundary(t);
    }
    let span = t - s_stop;
    if span <= 0.0 {
        return Exit::Reached(xi);
    }
    let n = ((span / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let tol = step * 1e-6;
    let mut s = t;
    let mut xi = xi;
    for i in 0..n {
        let xn = rk4_back(a, s, xi, h);
        if xn < 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            let (mut flo, mut fhi) = (xi, xn);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let fm = rk4_back(a, s, xi, mid);
                if fm >= 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                    fhi = fm;
                }
            }
            let tau = lo + (hi - lo) * flo / (flo - fhi);
            let e = (s - tau).max(s_stop);
            if let Some(p) = path.as_deref_mut() {
                p.push((e, 0.0));
            }
            return Exit::Boundary(e);
        }
        s = if i + 1 == n { s_stop } else { s - h };
        xi = xn;
        if let Some(p) = path.as_deref_mut() {
            p.push((s, xi));
        }
    }
    Exit::Reached(xi)
}

/// Classification tolerance for the corner characteristic.
pub(crate) fn corner_tolerance(step: f64) -> f64 {
    10.0 * step * 1e-6
}

fn to_physical(a: &Coefficient, xi: f64) -> f64 {
    a.to_reduced(xi)
}

/// Integrates `∂s φ = a(s, φ)` backward from `(t, x)` with RK4 steps of
/// size at most `step`, locating the inflow crossing by bisection.
pub fn integrate_characteristic(a: &Coefficient, t: f64, x: f64, step: f64) -> Result<CharacteristicRecord> {
    check_step(a, step)?;
    let d = a.domain();
    if !d.contains(t, x) {
        return Err(Error::InvalidDomain(format!("({t}, {x}) outside the domain")));
    }
    let xi = a.to_reduced(x);
    let mut path = vec![(t, xi)];
    let exit = trace_to(a, t, xi, 0.0, step, Some(&mut path));
    let tol_p = corner_tolerance(step);
    let (entrance_time, class, foot) = match exit {
        Exit::Boundary(e) if e < tol_p => (0.0, EntranceClass::P, 0.0),
        Exit::Boundary(e) => (e, EntranceClass::J, 0.0),
        Exit::Reached(f) if f < tol_p => (0.0, EntranceClass::P, f),
        Exit::Reached(f) => (0.0, EntranceClass::I, f),
    };
    let path = path.into_iter().map(|(s, p)| (s, to_physical(a, p))).collect();
    Ok(CharacteristicRecord {
        entrance_time,
        class,
        foot: to_physical(a, foot),
        path,
    })
}

/// `(e(t, x), class)`.
pub fn entrance_time(a: &Coefficient, t: f64, x: f64, step: f64) -> Result<(f64, EntranceClass)> {
    integrate_characteristic(a, t, x, step).map(|r| (r.entrance_time, r.class))
}

/// The extended flow `φ(s, t, x)` for any `s`, with no boundary stop.
pub fn flow(a: &Coefficient, s: f64, t: f64, x: f64, step: f64) -> f64 {
    let span = s - t;
    if span == 0.0 {
        return x;
    }
    let n = (span.abs() / step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut r = t;
    let mut xi = a.to_reduced(x);
    for _ in 0..n {
        // a forward step of size h is a backward step of size -h
        xi = rk4_back(a, r, xi, -h);
        r += h;
    }
    a.to_reduced(xi)
}

/// `∫ ∂ξ b(r, ξ(r)) dr` over a reduced path, by the trapezoid rule.
fn path_integral(a: &Coefficient, path: &[(f64, f64)]) -> f64 {
    path.windows(2)
        .map(|w| {
            let (s0, x0) = w[0];
            let (s1, x1) = w[1];
            0.5 * (s0 - s1) * (a.reduced_dxi(s0, x0) + a.reduced_dxi(s1, x1))
        })
        .sum()
}

fn reduced_record(a: &Coefficient, t: f64, x: f64, step: f64) -> Result<(Exit, Vec<(f64, f64)>)> {
    check_step(a, step)?;
    let xi = a.to_reduced(x);
    let mut path = vec![(t, xi)];
    let exit = trace_to(a, t, xi, 0.0, step, Some(&mut path));
    Ok((exit, path))
}

/// `(∂t e, ∂x e)` from the closed-form expressions along the characteristic.
pub fn entrance_derivatives(a: &Coefficient, t: f64, x: f64, step: f64) -> Result<(f64, f64)> {
    let (exit, path) = reduced_record(a, t, x, step)?;
    let e = match exit {
        Exit::Boundary(e) if e >= corner_tolerance(step) => e,
        _ => return Err(Error::NotInJ { t, x }),
    };
    let damp = (-path_integral(a, &path)).exp();
    let b_in = a.reduced(e, 0.0);
    let b_here = a.reduced(t, a.to_reduced(x));
    let dir = a.direction().sign();
    Ok((b_here * damp / b_in, -dir * damp / b_in))
}

/// `(∂t y, ∂x y)` of the transport solution at `(t, x)`, given the
/// derivatives of the initial profile and of the boundary trace.
pub fn solution_gradient(
    a: &Coefficient,
    t: f64,
    x: f64,
    y0_prime: impl Fn(f64) -> f64,
    yl_prime: impl Fn(f64) -> f64,
    step: f64,
) -> Result<(f64, f64)> {
    let (exit, path) = reduced_record(a, t, x, step)?;
    let dir = a.direction().sign();
    let damp = (-path_integral(a, &path)).exp();
    let b_here = a.reduced(t, a.to_reduced(x));
    let (dt, dxi) = match exit {
        Exit::Boundary(e) => {
            let b_in = a.reduced(e, 0.0);
            let g = yl_prime(e);
            (g * b_here / b_in * damp, -g / b_in * damp)
        }
        Exit::Reached(xi0) => {
            let g = dir * y0_prime(a.to_reduced(xi0));
            (-g * b_here * damp, g * damp)
        }
    };
    Ok((dt, dir * dxi))
}

impl Direction {
    /// Physical coordinate of the inflow boundary.
    pub fn inflow(self, length: f64) -> f64 {
        match self {
            Direction::Positive => 0.0,
            Direction::Negative => length,
        }
    }
}
