//! Speed fields `a(t, x)` and the extension operator.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{locate, Domain, Field};

/// Sign of a coefficient. Negative speeds are handled by the change of
/// variables `x → L - x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }
}

/// Anything that can be evaluated as a speed on `[0,T] × [0,L]`.
pub trait SpeedField: Send + Sync {
    fn speed(&self, t: f64, x: f64) -> f64;

    /// `∂x a`, when available in closed form.
    fn speed_dx(&self, _t: f64, _x: f64) -> Option<f64> {
        None
    }
}

type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

struct Analytic {
    f: Fn2,
    dx: Option<Fn2>,
}

impl SpeedField for Analytic {
    fn speed(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }

    fn speed_dx(&self, t: f64, x: f64) -> Option<f64> {
        self.dx.as_ref().map(|d| d(t, x))
    }
}

impl SpeedField for Field {
    fn speed(&self, t: f64, x: f64) -> f64 {
        self.sample(t, x)
    }

    fn speed_dx(&self, t: f64, x: f64) -> Option<f64> {
        let (k, wt) = locate(self.t_nodes(), t);
        let (j, _) = locate(self.x_nodes(), x);
        let h = self.x_nodes()[j + 1] - self.x_nodes()[j];
        let lo = (self.at(k, j + 1) - self.at(k, j)) / h;
        let hi = (self.at(k + 1, j + 1) - self.at(k + 1, j)) / h;
        Some(lo * (1.0 - wt) + hi * wt)
    }
}

/// Folds `(t, x) ∈ ℝ²` back into `[0,T] × [0,L]`: even reflection across
/// `x = L`, `2L`-periodic in `x`, frozen in `t` outside `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionMap {
    pub horizon: f64,
    pub length: f64,
}

impl ExtensionMap {
    pub fn fold(&self, t: f64, x: f64) -> (f64, f64) {
        let l = self.length;
        let t = t.clamp(0.0, self.horizon);
        if (0.0..=l).contains(&x) {
            return (t, x);
        }
        let mut r = x.rem_euclid(2.0 * l);
        if r > l {
            r = 2.0 * l - r;
        }
        (t, r)
    }

    /// `Π(f)(t, x)`.
    pub fn apply(&self, f: impl Fn(f64, f64) -> f64, t: f64, x: f64) -> f64 {
        let (t, x) = self.fold(t, x);
        f(t, x)
    }
}

/// A speed field together with the metadata the characteristic estimates need.
#[derive(Clone)]
pub struct Coefficient {
    field: Arc<dyn SpeedField>,
    domain: Domain,
    direction: Direction,
    sup_norm: f64,
    lipschitz: f64,
    resolution: f64,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficient")
            .field("domain", &self.domain)
            .field("direction", &self.direction)
            .field("sup_norm", &self.sup_norm)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

const SCAN: usize = 201;

impl Coefficient {
    /// Constant speed `a` on `domain`.
    pub fn constant(a: f64, domain: Domain) -> Result<Self> {
        Self::analytic(domain, move |_, _| a).map(|c| c.with_derivative(|_, _| 0.0))
    }

    /// Wraps a callable. Sign, sup norm and the Lipschitz constant in `x` are
    /// measured on a `201 × 201` scan of the domain.
    pub fn analytic(domain: Domain, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let mut sup = 0.0_f64;
        let mut floor = f64::INFINITY;
        let mut lip = 0.0_f64;
        let mut sign = 0.0_f64;
        let dt = domain.horizon / (SCAN - 1) as f64;
        let dx = domain.length / (SCAN - 1) as f64;
        for k in 0..SCAN {
            let t = k as f64 * dt;
            let mut prev = f64::NAN;
            for j in 0..SCAN {
                let x = j as f64 * dx;
                let a = f(t, x);
                if !a.is_finite() {
                    return Err(Error::InvalidCoefficient(format!("a({t}, {x}) = {a}")));
                }
                if sign == 0.0 {
                    sign = a.signum();
                }
                if a * sign <= 0.0 {
                    return Err(Error::InvalidCoefficient(format!(
                        "speed changes sign or vanishes at ({t}, {x})"
                    )));
                }
                sup = sup.max(a.abs());
                floor = floor.min(a.abs());
                if j > 0 {
                    lip = lip.max((a - prev).abs() / dx);
                }
                prev = a;
            }
        }
        if floor < domain.speed_floor * (1.0 - 1e-12) {
            return Err(Error::InvalidCoefficient(format!(
                "|a| reaches {floor}, below the floor c = {}",
                domain.speed_floor
            )));
        }
        Ok(Self {
            field: Arc::new(Analytic {
                f: Arc::new(f),
                dx: None,
            }),
            domain,
            direction: if sign > 0.0 {
                Direction::Positive
            } else {
                Direction::Negative
            },
            sup_norm: sup,
            lipschitz: lip,
            resolution: domain.length / 4.0,
        })
    }

    /// Tabulated speeds, bilinearly interpolated. The floor is the smallest
    /// `|a|` on the table, which is exact for the bilinear interpolant.
    pub fn tabulated(field: Field) -> Result<Self> {
        let values = field.values();
        let first = values[[0, 0]];
        if first == 0.0 {
            return Err(Error::InvalidCoefficient("speed vanishes at (0, 0)".into()));
        }
        let sign = first.signum();
        let mut floor = f64::INFINITY;
        let mut sup = 0.0_f64;
        for (idx, &a) in values.indexed_iter() {
            if !(a * sign > 0.0) {
                return Err(Error::InvalidCoefficient(format!(
                    "tabulated speed changes sign at node {idx:?}: {a}"
                )));
            }
            floor = floor.min(a.abs());
            sup = sup.max(a.abs());
        }
        let xs = field.x_nodes();
        let mut lip = 0.0_f64;
        for row in values.rows() {
            for j in 0..row.len() - 1 {
                lip = lip.max((row[j + 1] - row[j]).abs() / (xs[j + 1] - xs[j]));
            }
        }
        let domain = Domain::new(*field.t_nodes().last().unwrap(), *xs.last().unwrap(), floor)?;
        let resolution = xs[1] - xs[0];
        Ok(Self {
            field: Arc::new(field),
            domain,
            direction: if sign > 0.0 {
                Direction::Positive
            } else {
                Direction::Negative
            },
            sup_norm: sup,
            lipschitz: lip,
            resolution,
        })
    }

    /// Attaches a closed-form `∂x a`.
    pub fn with_derivative(self, dx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        let field = self.field.clone();
        Self {
            field: Arc::new(Analytic {
                f: Arc::new(move |t, x| field.speed(t, x)),
                dx: Some(Arc::new(dx)),
            }),
            ..self
        }
    }

    /// Replaces the measured Lipschitz constant by a known one.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.field.speed(t, x)
    }

    /// `∂x a`; central differences when no closed form is attached.
    pub fn eval_dx(&self, t: f64, x: f64) -> f64 {
        if let Some(d) = self.field.speed_dx(t, x) {
            return d;
        }
        let l = self.domain.length;
        let h = 1e-6 * l;
        let lo = (x - h).max(0.0);
        let hi = (x + h).min(l);
        (self.field.speed(t, hi) - self.field.speed(t, lo)) / (hi - lo)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `L = ‖a‖_{L∞(0,T; Lip)}`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn speed_floor(&self) -> f64 {
        self.domain.speed_floor
    }

    /// Spatial resolution of the underlying data (table spacing, or `L/4` for
    /// callables); bounds the admissible integration step.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// `K = max(1, ‖a‖∞) e^{LT}`, the Lipschitz constant of the flow.
    pub fn flow_lipschitz(&self) -> f64 {
        self.sup_norm.max(1.0) * (self.lipschitz * self.domain.horizon).exp()
    }

    /// `K̄ = K / c`, the Lipschitz constant of the entrance time.
    pub fn entrance_lipschitz(&self) -> f64 {
        self.flow_lipschitz() / self.domain.speed_floor
    }

    pub fn extension_map(&self) -> ExtensionMap {
        ExtensionMap {
            horizon: self.domain.horizon,
            length: self.domain.length,
        }
    }

    /// The positive speed seen in reduced coordinates `ξ` (`ξ = x` for
    /// positive coefficients, `ξ = L - x` otherwise), extended to all of ℝ².
    #[inline]
    pub(crate) fn reduced(&self, s: f64, xi: f64) -> f64 {
        let (s, xi) = self.extension_map().fold(s, xi);
        match self.direction {
            Direction::Positive => self.field.speed(s, xi),
            Direction::Negative => -self.field.speed(s, self.domain.length - xi),
        }
    }

    /// `∂ξ` of the reduced speed, inside the domain.
    pub(crate) fn reduced_dxi(&self, s: f64, xi: f64) -> f64 {
        let (s, xi) = self.extension_map().fold(s, xi);
        match self.direction {
            Direction::Positive => self.eval_dx(s, xi),
            Direction::Negative => self.eval_dx(s, self.domain.length - xi),
        }
    }

    pub(crate) fn to_reduced(&self, x: f64) -> f64 {
        match self.direction {
            Direction::Positive => x,
            Direction::Negative => self.domain.length - x,
        }
    }
}

/// `Π(a)`: the coefficient extended to all of space-time.
#[derive(Debug, Clone)]
pub struct ExtendedCoefficient {
    inner: Coefficient,
}

pub fn extend_coefficient(a: &Coefficient) -> ExtendedCoefficient {
    ExtendedCoefficient { inner: a.clone() }
}

impl ExtendedCoefficient {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let (t, x) = self.inner.extension_map().fold(t, x);
        self.inner.eval(t, x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    pub fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }

    pub fn speed_floor(&self) -> f64 {
        self.inner.speed_floor()
    }
}
