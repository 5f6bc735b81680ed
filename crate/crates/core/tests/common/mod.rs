//! Reference computations and shared configurations for the integration
//! tests. Nothing here calls into the characteristic solvers.

#![allow(dead_code)]

use std::collections::BTreeMap;

use hypstab_core::feedback::PowerFeedback;
use hypstab_core::network::{balance_junctions, CanalTree, EdgeData, EdgeSpec, NetworkScenario};
use hypstab_core::quasilinear::DiagonalSystem;
use hypstab_core::saintvenant::CanalParams;
use hypstab_core::Profile;

/// `w(t_end)` for `w' = f(w)` by RK4 with step doubling and local error
/// control; returns 0 once `|w|` drops below `floor`.
pub fn rk4_adaptive(f: impl Fn(f64) -> f64, w0: f64, t_end: f64, tol: f64, floor: f64) -> f64 {
    let step = |w: f64, h: f64| {
        let k1 = f(w);
        let k2 = f(w + 0.5 * h * k1);
        let k3 = f(w + 0.5 * h * k2);
        let k4 = f(w + h * k3);
        w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let mut t = 0.0;
    let mut w = w0;
    let mut h: f64 = 1e-3;
    while t < t_end {
        if w.abs() < floor {
            return 0.0;
        }
        h = h.min(t_end - t);
        let full = step(w, h);
        let half = step(step(w, 0.5 * h), 0.5 * h);
        let err = (full - half).abs();
        if err <= tol || h < 1e-14 {
            w = half + (half - full) / 15.0;
            t += h;
            let grow = if err == 0.0 {
                2.0
            } else {
                (0.9 * (tol / err).powf(0.2)).min(2.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * (tol / err).powf(0.2)).max(0.1);
        }
    }
    w
}

/// `∫_a^b f` by adaptive Simpson.
pub fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Entrance time and foot for a positive, time-independent speed `a(x)`:
/// the travel time from `0` to `x` is `∫_0^x dξ / a(ξ)`.
pub fn stationary_entrance(a: impl Fn(f64) -> f64, t: f64, x: f64) -> (f64, f64) {
    let inv = |s: f64| 1.0 / a(s);
    let travel = simpson(&inv, 0.0, x, 1e-14);
    if t >= travel {
        return (t - travel, 0.0);
    }
    let (mut lo, mut hi) = (0.0, x);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if simpson(&inv, mid, x, 1e-14) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.0, 0.5 * (lo + hi))
}

pub fn half_power() -> PowerFeedback {
    PowerFeedback::new(1.0, 0.5).unwrap()
}

/// `λ = 1 + (3u + v)/4`, `μ = -1 + (u + 3v)/4`, nominal floor 1.
pub fn affine_system() -> DiagonalSystem {
    DiagonalSystem::affine([1.0, 0.75, 0.25], [-1.0, 0.25, 0.75], 1.0).unwrap()
}

/// `amplitude · sin(πx)` flattened on the outer tenths of `[0, 1]`.
pub fn flattened_sine(amplitude: f64) -> Profile {
    Profile::flattened_sine(1.0, 0.0, amplitude, 1.0, 0.0, 0.1)
}

pub fn edge(from: usize, to: usize, length: f64) -> EdgeSpec {
    EdgeSpec { from, to, length }
}

/// One canal `H* = 1, V* = 0.5, l = 1` with a depth bump of `amplitude`.
pub fn single_canal(amplitude: f64, nx: usize, nt: usize) -> NetworkScenario {
    let p = CanalParams::new(1.0, 0.5, 9.81, 1.0).unwrap();
    let h0 = Profile::flattened_sine(1.0, 1.0, amplitude, 1.0, 0.0, 0.1);
    let v0 = Profile::constant(1.0, 0.5);
    NetworkScenario {
        tree: CanalTree::from_edges(2, vec![edge(1, 2, 1.0)]).unwrap(),
        edges: vec![EdgeData::from_physical(p, &h0, &v0).unwrap()],
        leaf_kinds: BTreeMap::new(),
        feedback: half_power(),
        nx,
        nt,
        horizon: None,
    }
}

/// Two canals with `Q* = 0.25` feeding one with `Q* = 0.5`; depth bumps of
/// `amplitude` with different shapes, balanced at the junction.
pub fn star_network(amplitude: f64, nx: usize, nt: usize) -> NetworkScenario {
    let tree = CanalTree::from_edges(4, vec![edge(1, 3, 1.0), edge(2, 3, 0.8), edge(3, 4, 1.0)]).unwrap();
    let params = vec![
        CanalParams::new(1.0, 0.25, 9.81, 1.0).unwrap(),
        CanalParams::new(1.25, 0.2, 9.81, 0.8).unwrap(),
        CanalParams::new(1.0, 0.5, 9.81, 1.0).unwrap(),
    ];
    let mut init: Vec<(Profile, Profile)> = params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            (
                Profile::flattened_sine(p.length, p.h_star, amplitude, 1.0 + i as f64, 0.3 * i as f64, 0.1),
                Profile::constant(p.length, p.v_star),
            )
        })
        .collect();
    let kinds = BTreeMap::new();
    balance_junctions(&tree, &params, &mut init, &kinds);
    let edges = init
        .iter()
        .zip(&params)
        .map(|((h, v), p)| EdgeData::from_physical(*p, h, v).unwrap())
        .collect();
    NetworkScenario {
        tree,
        edges,
        leaf_kinds: kinds,
        feedback: half_power(),
        nx,
        nt,
        horizon: None,
    }
}
