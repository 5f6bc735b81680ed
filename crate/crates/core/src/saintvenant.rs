//! Shallow-water canals: Riemann invariants, characteristic speeds and the
//! boundary devices that realize the feedback laws.
//!
//! In each canal `∂t H + ∂x(HV) = 0` and `∂t V + ∂x(V²/2 + gH) = 0`. Around a
//! subcritical equilibrium `(H*, V*)` the diagonal variables are
//! `u = V + 2√(gH) - (V* + 2√(gH*))` and `v = V - 2√(gH) - (V* - 2√(gH*))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quasilinear::{BoundaryMap, DiagonalSystem};
use crate::roots::newton_bisect;

pub const DEFAULT_GRAVITY: f64 = 9.81;

/// Equilibrium and geometry of one canal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanalParams {
    pub h_star: f64,
    pub v_star: f64,
    pub g: f64,
    pub length: f64,
}

impl CanalParams {
    pub fn new(h_star: f64, v_star: f64, g: f64, length: f64) -> Result<Self> {
        if !(h_star > 0.0) {
            return Err(Error::NonpositiveDepth(h_star));
        }
        if !(g > 0.0 && length > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "gravity {g} and length {length} must be positive"
            )));
        }
        let p = Self {
            h_star,
            v_star,
            g,
            length,
        };
        if !(v_star > 0.0 && v_star < p.celerity_star()) {
            return Err(Error::NotSubcritical(format!(
                "need 0 < V* < sqrt(g H*) = {}, got V* = {v_star}",
                p.celerity_star()
            )));
        }
        Ok(p)
    }

    /// `√(g H*)`.
    pub fn celerity_star(&self) -> f64 {
        (self.g * self.h_star).sqrt()
    }

    pub fn q_star(&self) -> f64 {
        self.h_star * self.v_star
    }

    /// The diagonal system in `(u, v)`; exact, since the speeds are affine in
    /// the Riemann variables.
    pub fn diagonal_system(&self, c: f64) -> Result<DiagonalSystem> {
        let cs = self.celerity_star();
        DiagonalSystem::affine([self.v_star + cs, 0.75, 0.25], [self.v_star - cs, 0.25, 0.75], c)
    }

    /// Half-width of the `(u, v)` box on which boundary maps are studied:
    /// `min(c, 2√(gH*)) / 2`, which keeps the depth positive.
    pub fn working_radius(&self, c: f64) -> f64 {
        0.5 * c.min(2.0 * self.celerity_star())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalState {
    pub h: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannPair {
    pub u: f64,
    pub v: f64,
}

pub fn to_riemann(s: PhysicalState, p: &CanalParams) -> Result<RiemannPair> {
    if !(s.h > 0.0) {
        return Err(Error::NonpositiveDepth(s.h));
    }
    let c = (p.g * s.h).sqrt();
    let cs = p.celerity_star();
    Ok(RiemannPair {
        u: s.v + 2.0 * c - (p.v_star + 2.0 * cs),
        v: s.v - 2.0 * c - (p.v_star - 2.0 * cs),
    })
}

/// `√H* + (u - v)/(4√g)`, the square root of the depth.
fn sqrt_depth(r: RiemannPair, p: &CanalParams) -> f64 {
    p.h_star.sqrt() + (r.u - r.v) / (4.0 * p.g.sqrt())
}

pub fn from_riemann(r: RiemannPair, p: &CanalParams) -> Result<PhysicalState> {
    let a = sqrt_depth(r, p);
    if !(a > 0.0) {
        return Err(Error::DepthCollapse(a));
    }
    Ok(PhysicalState {
        h: a * a,
        v: p.v_star + 0.5 * (r.u + r.v),
    })
}

/// `(λ, μ) = (V* + √(gH*) + (3u + v)/4, V* - √(gH*) + (u + 3v)/4)`.
pub fn char_speeds(r: RiemannPair, p: &CanalParams) -> (f64, f64) {
    let cs = p.celerity_star();
    (
        p.v_star + cs + (3.0 * r.u + r.v) / 4.0,
        p.v_star - cs + (r.u + 3.0 * r.v) / 4.0,
    )
}

/// `(V + √(gH), V - √(gH))` in physical variables.
pub fn physical_speeds(s: PhysicalState, p: &CanalParams) -> (f64, f64) {
    let c = (p.g * s.h).sqrt();
    (s.v + c, s.v - c)
}

/// The largest uniform floor `c` with `√(gH*) - V* > 2c` on every canal.
pub fn pick_c(params: &[CanalParams]) -> Result<f64> {
    if params.is_empty() {
        return Err(Error::NotSubcritical("no canals".into()));
    }
    let mut gap = f64::INFINITY;
    for (i, p) in params.iter().enumerate() {
        let g = p.celerity_star() - p.v_star;
        if !(p.v_star > 0.0 && g > 0.0) {
            return Err(Error::NotSubcritical(format!(
                "canal {i}: V* = {}, sqrt(g H*) = {}",
                p.v_star,
                p.celerity_star()
            )));
        }
        gap = gap.min(g);
    }
    Ok(0.5 * gap * (1.0 - 1e-9))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Flow rate a gate must pass so that the outgoing Riemann variable equals
/// `trace_value`, given the measured depth.
pub fn controlled_flow_rate(side: Side, h_measured: f64, trace_value: f64, p: &CanalParams) -> Result<f64> {
    if !(h_measured > 0.0) {
        return Err(Error::NonpositiveDepth(h_measured));
    }
    let c = (p.g * h_measured).sqrt();
    let cs = p.celerity_star();
    Ok(match side {
        Side::Right => h_measured * (trace_value + 2.0 * c + p.v_star - 2.0 * cs),
        Side::Left => h_measured * (trace_value - 2.0 * c + p.v_star + 2.0 * cs),
    })
}

/// `Q = H V` as a function of the Riemann variables.
pub fn flow_rate(u: f64, v: f64, p: &CanalParams) -> f64 {
    let r = RiemannPair { u, v };
    let a = sqrt_depth(r, p);
    a * a * (p.v_star + 0.5 * (u + v))
}

/// `(∂Q/∂u, ∂Q/∂v)`.
pub fn flow_rate_partials(u: f64, v: f64, p: &CanalParams) -> (f64, f64) {
    let a = sqrt_depth(RiemannPair { u, v }, p);
    let b = p.v_star + 0.5 * (u + v);
    let sg = p.g.sqrt();
    let cross = a * b / (2.0 * sg);
    (cross + 0.5 * a * a, -cross + 0.5 * a * a)
}

/// Solves `Q(u, v) = q_target` for `u`, starting from the linearization at 0.
pub fn solve_u_for_flow(v: f64, q_target: f64, p: &CanalParams) -> Result<f64> {
    let (qu, qv) = flow_rate_partials(0.0, 0.0, p);
    let seed = (q_target - p.q_star() - qv * v) / qu;
    let width = 4.0 * v.abs().max(seed.abs()).max(1e-12);
    newton_bisect(
        |u| flow_rate(u, v, p) - q_target,
        |u| flow_rate_partials(u, v, p).0,
        seed,
        width,
    )
}

/// The map `v ↦ u` at an uncontrolled inflow end where the flow rate is held
/// at `Q*`: the root of `F(u, v) = Q(u, v) - H* V*`.
pub fn simple_node_map(p: &CanalParams, c: f64) -> Result<BoundaryMap> {
    let pc = *p;
    let h = move |v: f64, _t: f64| -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        solve_u_for_flow(v, pc.q_star(), &pc).unwrap_or(f64::NAN)
    };
    let radius = p.working_radius(c);
    let n = 201;
    let mut prev: Option<f64> = None;
    let mut d1 = 0.0_f64;
    let dv = 2.0 * radius / (n - 1) as f64;
    for i in 0..n {
        let v = -radius + dv * i as f64;
        let u = solve_u_for_flow(v, p.q_star(), p)?;
        if let Some(q) = prev {
            d1 = d1.max((u - q).abs() / dv);
        }
        prev = Some(u);
    }
    Ok(BoundaryMap::new(h, d1, 0.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canal() -> CanalParams {
        CanalParams::new(1.0, 0.5, 9.81, 1.0).unwrap()
    }

    #[test]
    fn test_equilibrium_maps_to_zero() {
        let p = canal();
        let r = to_riemann(PhysicalState { h: 1.0, v: 0.5 }, &p).unwrap();
        assert_eq!((r.u, r.v), (0.0, 0.0));
        let s = from_riemann(RiemannPair { u: 0.0, v: 0.0 }, &p).unwrap();
        assert_eq!((s.h, s.v), (1.0, 0.5));
    }

    #[test]
    fn test_depth_perturbation() {
        let p = canal();
        let r = to_riemann(PhysicalState { h: 1.1, v: 0.5 }, &p).unwrap();
        let expected = 2.0 * (10.791_f64.sqrt() - 9.81_f64.sqrt());
        assert!((r.u - expected).abs() < 1e-12);
        assert!((r.v + expected).abs() < 1e-12);
        let s = from_riemann(RiemannPair { u: 0.1, v: -0.1 }, &p).unwrap();
        let h = (1.0 + 0.2 / (4.0 * 9.81_f64.sqrt())).powi(2);
        assert!((s.h - h).abs() < 1e-14);
        assert!((s.v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn test_speeds_and_floor() {
        let p = canal();
        let (l, m) = char_speeds(RiemannPair { u: 0.0, v: 0.0 }, &p);
        assert!((l - 3.632091).abs() < 1e-6);
        assert!((m + 2.632091).abs() < 1e-6);
        let c = pick_c(&[p]).unwrap();
        assert!((c - 1.316046).abs() < 1e-6);
        let q = CanalParams { v_star: 0.2, ..p };
        assert_eq!(pick_c(&[p, q]).unwrap(), c);
    }

    #[test]
    fn test_not_subcritical() {
        assert!(matches!(
            CanalParams::new(1.0, 9.81_f64.sqrt(), 9.81, 1.0),
            Err(Error::NotSubcritical(_))
        ));
        let bad = CanalParams {
            h_star: 1.0,
            v_star: 9.81_f64.sqrt(),
            g: 9.81,
            length: 1.0,
        };
        assert!(pick_c(&[bad]).is_err());
    }

    #[test]
    fn test_device_flow_rates() {
        let p = canal();
        assert!((controlled_flow_rate(Side::Right, 1.0, 0.0, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!((controlled_flow_rate(Side::Right, 1.0, -0.1, &p).unwrap() - 0.4).abs() < 1e-14);
        assert!((controlled_flow_rate(Side::Left, 1.0, 0.1, &p).unwrap() - 0.6).abs() < 1e-14);
        assert!(controlled_flow_rate(Side::Left, 0.0, 0.1, &p).is_err());
    }

    #[test]
    fn test_simple_node_map() {
        let p = canal();
        let c = pick_c(&[p]).unwrap();
        let h = simple_node_map(&p, c).unwrap();
        assert_eq!(h.eval(0.0, 0.3), 0.0);
        let (fu, _) = flow_rate_partials(0.0, 0.0, &p);
        assert!((fu - 0.5 * (1.0 + 0.5 / 9.81_f64.sqrt())).abs() < 1e-14);
        for i in 0..21 {
            let v = -0.5 + 0.05 * i as f64;
            let u = h.eval(v, 0.0);
            assert!((flow_rate(u, v, &p) - p.q_star()).abs() <= 1e-12);
        }
        assert!(h.d1() > 0.0 && h.d1().is_finite());
    }
}
