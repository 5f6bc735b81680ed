//! Boundary maps `u(t, 0) = h(v(t, 0), t)` for the one-control problem.

use std::fmt;
use std::sync::Arc;

type MapFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A boundary map with its regularity constants: `D1 = sup |∂v h|`,
/// `D2 = sup |∂t h|`, and `T_h` after which `h(0, t) = 0`.
#[derive(Clone)]
pub struct BoundaryMap {
    h: MapFn,
    d1: f64,
    d2: f64,
    t_h: f64,
}

impl fmt::Debug for BoundaryMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryMap")
            .field("d1", &self.d1)
            .field("d2", &self.d2)
            .field("t_h", &self.t_h)
            .finish()
    }
}

impl BoundaryMap {
    pub fn new(h: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, d1: f64, d2: f64, t_h: f64) -> Self {
        Self {
            h: Arc::new(h),
            d1,
            d2,
            t_h,
        }
    }

    /// `h(v, t) = v`.
    pub fn reflection() -> Self {
        Self::new(|v, _| v, 1.0, 0.0, 0.0)
    }

    /// Wraps `h`, estimating `D1` and `D2` by finite differences on a
    /// `101 × 101` sampling of `[-v_radius, v_radius] × [0, horizon]`.
    pub fn measured(
        h: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        v_radius: f64,
        horizon: f64,
        t_h: f64,
    ) -> Self {
        let (d1, d2) = measure_partials(&h, v_radius, horizon, 101);
        Self::new(h, d1, d2, t_h)
    }

    pub fn eval(&self, v: f64, t: f64) -> f64 {
        (self.h)(v, t)
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn t_h(&self) -> f64 {
        self.t_h
    }

    /// `sup |h|` over `[-v_radius, v_radius] × [0, horizon]`, sampled.
    pub fn sup_over(&self, v_radius: f64, horizon: f64) -> f64 {
        let n = 201;
        let mut sup = 0.0_f64;
        for i in 0..n {
            let v = -v_radius + 2.0 * v_radius * i as f64 / (n - 1) as f64;
            for k in 0..n {
                let t = horizon * k as f64 / (n - 1) as f64;
                sup = sup.max(self.eval(v, t).abs());
            }
        }
        sup
    }
}

/// Largest difference quotients of `h` in `v` and in `t` on an `n × n` grid.
pub(crate) fn measure_partials(h: &impl Fn(f64, f64) -> f64, v_radius: f64, horizon: f64, n: usize) -> (f64, f64) {
    let dv = 2.0 * v_radius / (n - 1) as f64;
    let dt = horizon / (n - 1) as f64;
    let mut d1 = 0.0_f64;
    let mut d2 = 0.0_f64;
    for i in 0..n {
        let v = -v_radius + dv * i as f64;
        for k in 0..n {
            let t = dt * k as f64;
            let here = h(v, t);
            if i + 1 < n && dv > 0.0 {
                d1 = d1.max((h(v + dv, t) - here).abs() / dv);
            }
            if k + 1 < n && dt > 0.0 {
                d2 = d2.max((h(v, t + dt) - here).abs() / dt);
            }
        }
    }
    (d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_measured_constants() {
        let m = BoundaryMap::measured(|v, t| 2.0 * v + 0.5 * t, 1.0, 1.0, 0.0);
        assert!((m.d1() - 2.0).abs() < 1e-9);
        assert!((m.d2() - 0.5).abs() < 1e-9);
        assert_eq!(BoundaryMap::reflection().eval(0.3, 7.0), 0.3);
    }
}
