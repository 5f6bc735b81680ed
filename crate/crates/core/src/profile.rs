//! Initial profiles `y0(x)` and boundary traces `y_l(t)` with their sup and
//! Lipschitz metadata.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::grid::interp1;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const METADATA_SAMPLES: usize = 4001;

fn measure(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let h = (b - a) / (METADATA_SAMPLES - 1) as f64;
    let mut prev = f(a);
    let mut sup = prev.abs();
    let mut lip = 0.0_f64;
    for i in 1..METADATA_SAMPLES {
        let y = f(a + i as f64 * h);
        sup = sup.max(y.abs());
        lip = lip.max((y - prev).abs() / h);
        prev = y;
    }
    (sup, lip)
}

/// A Lipschitz function on `[0, length]`.
#[derive(Clone)]
pub struct Profile {
    f: ScalarFn,
    length: f64,
    sup: f64,
    lipschitz: f64,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("length", &self.length)
            .field("sup", &self.sup)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl Profile {
    /// Wraps `f`; sup norm and Lipschitz constant are measured on a dense sample.
    pub fn new(length: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let (sup, lipschitz) = measure(&f, 0.0, length);
        Self {
            f: Arc::new(f),
            length,
            sup,
            lipschitz,
        }
    }

    pub fn with_bounds(length: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static, sup: f64, lipschitz: f64) -> Self {
        Self {
            f: Arc::new(f),
            length,
            sup,
            lipschitz,
        }
    }

    pub fn constant(length: f64, value: f64) -> Self {
        Self::with_bounds(length, move |_| value, value.abs(), 0.0)
    }

    pub fn zero(length: f64) -> Self {
        Self::constant(length, 0.0)
    }

    /// Piecewise-linear interpolant of uniform samples over `[0, length]`.
    pub fn samples(length: f64, values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "need at least two samples");
        let n = values.len();
        let nodes: Vec<f64> = (0..n).map(|i| length * i as f64 / (n - 1) as f64).collect();
        let h = length / (n - 1) as f64;
        let sup = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let lipschitz = values.windows(2).fold(0.0_f64, |m, w| m.max((w[1] - w[0]).abs() / h));
        Self::with_bounds(length, move |x| interp1(&nodes, &values, x), sup, lipschitz)
    }

    /// `offset + amplitude · sin(π·frequency·ξ/length + phase)` where `ξ` is `x`
    /// clamped to `[flatten·length, (1 - flatten)·length]`, so the profile is
    /// flat on the two end strips of relative width `flatten`.
    pub fn flattened_sine(length: f64, offset: f64, amplitude: f64, frequency: f64, phase: f64, flatten: f64) -> Self {
        let flatten = flatten.clamp(0.0, 0.5);
        let lo = flatten * length;
        let hi = (1.0 - flatten) * length;
        Self::new(length, move |x| {
            let xi = x.clamp(lo, hi);
            offset + amplitude * (PI * frequency * xi / length + phase).sin()
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Pointwise image `g(y0(x))`, metadata re-measured.
    pub fn map(&self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Profile {
        let f = self.f.clone();
        Profile::new(self.length, move |x| g(f(x)))
    }

    /// Values at `n` uniform nodes of `[0, length]`.
    pub fn sample_uniform(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let x = if i + 1 == n {
                    self.length
                } else {
                    self.length * i as f64 / (n - 1) as f64
                };
                self.eval(x)
            })
            .collect()
    }
}

/// A Lipschitz function of time prescribing the inflow value.
#[derive(Clone)]
pub struct BoundaryTrace {
    f: ScalarFn,
    lipschitz: f64,
    sup: f64,
}

impl fmt::Debug for BoundaryTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryTrace")
            .field("sup", &self.sup)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl BoundaryTrace {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, sup: f64, lipschitz: f64) -> Self {
        Self {
            f: Arc::new(f),
            lipschitz,
            sup,
        }
    }

    /// Wraps `f`, measuring sup and Lipschitz constant on `[0, horizon]`.
    pub fn measured(horizon: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let (sup, lipschitz) = measure(&f, 0.0, horizon);
        Self::new(f, sup, lipschitz)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value, value.abs(), 0.0)
    }

    /// Linear interpolation of `(t_nodes, values)`, held constant outside.
    pub fn samples(t_nodes: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(t_nodes.len(), values.len());
        assert!(t_nodes.len() >= 2, "need at least two samples");
        let sup = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let lipschitz = t_nodes
            .windows(2)
            .zip(values.windows(2))
            .fold(0.0_f64, |m, (t, v)| m.max((v[1] - v[0]).abs() / (t[1] - t[0])));
        Self::new(move |t| interp1(&t_nodes, &values, t), sup, lipschitz)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }
}
