//! Named constants of the closed-loop estimates and the smallness conditions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::feedback::PowerFeedback;

use super::boundary::BoundaryMap;
use super::system::DiagonalSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerMode {
    TwoControl,
    OneControl,
}

/// Every constant entering the a-priori bounds, for one configuration.
///
/// `c3 = +∞` encodes `M2 = 0`; products `M2 · C3` are then taken as 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsLedger {
    pub mode: LedgerMode,
    pub c: f64,
    pub k: f64,
    pub gamma: f64,
    pub length: f64,
    pub c1: f64,
    pub c2: f64,
    pub c1_prime: f64,
    pub d1: f64,
    pub d2: f64,
    pub t_h: f64,
    pub m1: f64,
    pub m2: f64,
    /// `t* = C1^{1-γ} / ((1-γ) K)`.
    pub t_star: f64,
    pub horizon: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub c3: f64,
    pub c3_prime: f64,
    pub c3_dblprime: Option<f64>,
}

fn finite_or_null<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

/// Outcome of one smallness condition; the condition holds iff `margin ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub margin: f64,
}

impl ConditionCheck {
    fn from_margin(margin: f64) -> Self {
        Self {
            holds: margin <= 1.0,
            margin,
        }
    }
}

/// `exp(2 T M2 C3)` with the `M2 = 0` convention.
fn growth(horizon: f64, m2: f64, c3: f64) -> f64 {
    if m2 == 0.0 {
        1.0
    } else {
        (2.0 * horizon * m2 * c3).exp()
    }
}

impl ConstantsLedger {
    /// Two boundary controls, from already measured `M1`, `M2`.
    pub fn two_control(c: f64, fb: PowerFeedback, length: f64, c1: f64, c2: f64, m1: f64, m2: f64) -> Self {
        let (k, gamma) = (fb.gain(), fb.exponent());
        let t_star = fb.extinction_time_from(c1);
        let horizon = length / c + t_star;
        let c3 = if m2 == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (2.0 * horizon * m2)
        };
        let c3_prime = (k * c1.powf(gamma) / c).max(c2) * m1.max(1.0) * growth(horizon, m2, c3);
        Self {
            mode: LedgerMode::TwoControl,
            c,
            k,
            gamma,
            length,
            c1,
            c2,
            c1_prime: c1,
            d1: 0.0,
            d2: 0.0,
            t_h: 0.0,
            m1,
            m2,
            t_star,
            horizon,
            c3,
            c3_prime,
            c3_dblprime: None,
        }
    }

    /// One boundary control with map constants `C1′, D1, D2, T_h`.
    #[allow(clippy::too_many_arguments)]
    pub fn one_control(
        c: f64,
        fb: PowerFeedback,
        length: f64,
        c1: f64,
        c2: f64,
        c1_prime: f64,
        d1: f64,
        d2: f64,
        t_h: f64,
        m1: f64,
        m2: f64,
    ) -> Self {
        let (k, gamma) = (fb.gain(), fb.exponent());
        let t_star = fb.extinction_time_from(c1);
        let horizon = one_control_horizon(c, length, t_star, t_h);
        let c3 = if m2 == 0.0 {
            f64::INFINITY
        } else {
            (1.0 / (2.0 * horizon * m2)).max(c2)
        };
        let g = growth(horizon, m2, c3) * m1.max(1.0);
        let c3_prime = (k * c1.powf(gamma) / c).max(c2) * g;
        let c3_dblprime = ((d1 * c3_prime + d2) / c).max(c2) * g;
        Self {
            mode: LedgerMode::OneControl,
            c,
            k,
            gamma,
            length,
            c1,
            c2,
            c1_prime,
            d1,
            d2,
            t_h,
            m1,
            m2,
            t_star,
            horizon,
            c3,
            c3_prime,
            c3_dblprime: Some(c3_dblprime),
        }
    }

    /// Left side of the two-control smallness condition,
    /// `T M2 max(1, M1) max(K C1^γ / c, C2)`.
    pub fn two_control_left_side(&self) -> f64 {
        self.horizon * self.m2 * self.m1.max(1.0) * (self.k * self.c1.powf(self.gamma) / self.c).max(self.c2)
    }
}

fn one_control_horizon(c: f64, length: f64, t_star: f64, t_h: f64) -> f64 {
    length / c + t_h.max(length / c + t_star)
}

/// Measures `M1`, `M2` (and `C1′` when a boundary map is given) over the
/// working box by `200 × 200` sampling and fills in the remaining constants.
pub fn build_ledger(
    system: &DiagonalSystem,
    c1: f64,
    c2: f64,
    fb: PowerFeedback,
    length: f64,
    h: Option<&BoundaryMap>,
) -> Result<ConstantsLedger> {
    if !(c1 >= 0.0 && c1.is_finite() && c2 >= 0.0 && c2.is_finite()) {
        return Err(Error::InvalidDomain(format!(
            "C1 = {c1} and C2 = {c2} must be finite and nonnegative"
        )));
    }
    let c = system.speed_floor();
    match h {
        None => {
            let (m1, m2) = box_extrema(system, c1, c1)?;
            Ok(ConstantsLedger::two_control(c, fb, length, c1, c2, m1, m2))
        }
        Some(h) => {
            let t_star = fb.extinction_time_from(c1);
            let horizon = one_control_horizon(c, length, t_star, h.t_h());
            let c1_prime = c1.max(h.sup_over(c1, horizon));
            let (m1, m2) = box_extrema(system, c1_prime, c1)?;
            Ok(ConstantsLedger::one_control(
                c,
                fb,
                length,
                c1,
                c2,
                c1_prime,
                h.d1(),
                h.d2(),
                h.t_h(),
                m1,
                m2,
            ))
        }
    }
}

const BOX_SAMPLES: usize = 200;

/// `(sup max(|λ|, |μ|), sup of the four |partials|)` over
/// `[-ru, ru] × [-rv, rv]`.
pub fn box_extrema(system: &DiagonalSystem, ru: f64, rv: f64) -> Result<(f64, f64)> {
    let n = BOX_SAMPLES;
    let mut m1 = 0.0_f64;
    let mut m2 = 0.0_f64;
    for i in 0..n {
        let u = -ru + 2.0 * ru * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let v = -rv + 2.0 * rv * j as f64 / (n - 1) as f64;
            let l = system.lambda(u, v);
            let m = system.mu(u, v);
            let p = system.partials(u, v);
            if !(l.is_finite() && m.is_finite() && p.iter().all(|x| x.is_finite())) {
                return Err(Error::BoxEvaluationFailure { u, v });
            }
            m1 = m1.max(l.abs()).max(m.abs());
            m2 = p.iter().fold(m2, |acc, x| acc.max(x.abs()));
        }
    }
    Ok((m1, m2))
}

/// The two-control condition; `margin` is the left side times `2e`.
pub fn check_two_control(ledger: &ConstantsLedger) -> ConditionCheck {
    ConditionCheck::from_margin(ledger.two_control_left_side() * 2.0 * std::f64::consts::E)
}

/// The two one-control conditions `C3′ ≤ C3` and `C3″ ≤ C3`, with margins
/// `C3′ / C3` and `C3″ / C3`.
pub fn check_one_control(ledger: &ConstantsLedger) -> (ConditionCheck, ConditionCheck) {
    let ratio = |x: f64| if ledger.c3.is_infinite() { 0.0 } else { x / ledger.c3 };
    let dbl = ledger.c3_dblprime.unwrap_or(ledger.c3_prime);
    (
        ConditionCheck::from_margin(ratio(ledger.c3_prime)),
        ConditionCheck::from_margin(ratio(dbl)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fb() -> PowerFeedback {
        PowerFeedback::new(1.0, 0.5).unwrap()
    }

    #[test]
    fn test_constant_speeds_degenerate() {
        let sys = DiagonalSystem::affine([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 1.0).unwrap();
        let l = build_ledger(&sys, 0.04, 0.05, fb(), 1.0, None).unwrap();
        assert_eq!(l.m2, 0.0);
        assert!(l.c3.is_infinite());
        let chk = check_two_control(&l);
        assert!(chk.holds);
        assert_eq!(chk.margin, 0.0);
    }

    #[test]
    fn test_affine_box_extrema() {
        let sys = DiagonalSystem::affine([1.0, 0.75, 0.25], [-1.0, 0.25, 0.75], 1.0).unwrap();
        let l = build_ledger(&sys, 0.04, 0.05, fb(), 1.0, None).unwrap();
        assert!((l.m1 - 1.04).abs() < 1e-12);
        assert_eq!(l.m2, 0.75);
        assert!((l.horizon - 1.4).abs() < 1e-12);
    }

    #[test]
    fn test_one_control_trivial() {
        let sys = DiagonalSystem::affine([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 1.0).unwrap();
        let h = BoundaryMap::new(|_, _| 0.0, 0.0, 0.0, 0.0);
        let l = build_ledger(&sys, 0.04, 0.05, fb(), 1.0, Some(&h)).unwrap();
        let (a, b) = check_one_control(&l);
        assert!(a.holds && b.holds);
    }
}
