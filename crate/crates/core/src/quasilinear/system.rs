//! The diagonal system `∂t u + λ(u,v) ∂x u = 0`, `∂t v + μ(u,v) ∂x v = 0`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Speed2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Characteristic speeds `λ > 0 > μ` of a 2×2 diagonal system.
#[derive(Clone)]
pub struct DiagonalSystem {
    lambda: Speed2,
    mu: Speed2,
    /// `[∂u λ, ∂v λ, ∂u μ, ∂v μ]` in closed form, when known.
    partials: Option<[Speed2; 4]>,
    c: f64,
    box_extension: Option<(f64, f64)>,
}

impl fmt::Debug for DiagonalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiagonalSystem")
            .field("c", &self.c)
            .field("analytic_partials", &self.partials.is_some())
            .field("box_extension", &self.box_extension)
            .finish()
    }
}

const FD_STEP: f64 = 1e-6;

impl DiagonalSystem {
    /// `c` is the nominal speed floor used by the constants ledger.
    pub fn new(
        lambda: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        mu: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        c: f64,
    ) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "speed floor must be positive, got {c}"
            )));
        }
        Ok(Self {
            lambda: Arc::new(lambda),
            mu: Arc::new(mu),
            partials: None,
            c,
            box_extension: None,
        })
    }

    /// `λ = l[0] + l[1] u + l[2] v`, `μ = m[0] + m[1] u + m[2] v`.
    pub fn affine(l: [f64; 3], m: [f64; 3], c: f64) -> Result<Self> {
        let sys = Self::new(
            move |u, v| l[0] + l[1] * u + l[2] * v,
            move |u, v| m[0] + m[1] * u + m[2] * v,
            c,
        )?;
        Ok(sys.with_partials(move |_, _| l[1], move |_, _| l[2], move |_, _| m[1], move |_, _| m[2]))
    }

    /// Attaches closed-form partial derivatives.
    pub fn with_partials(
        mut self,
        lu: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lv: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        mu_u: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        mu_v: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.partials = Some([Arc::new(lu), Arc::new(lv), Arc::new(mu_u), Arc::new(mu_v)]);
        self
    }

    /// Continues `λ, μ` outside `[-ru, ru] × [-rv, rv]` by their values on the
    /// box boundary instead of letting the solver fail on box exit.
    pub fn with_box_extension(mut self, ru: f64, rv: f64) -> Self {
        self.box_extension = Some((ru, rv));
        self
    }

    pub fn box_extension(&self) -> Option<(f64, f64)> {
        self.box_extension
    }

    #[inline]
    fn clamp(&self, u: f64, v: f64) -> (f64, f64) {
        match self.box_extension {
            Some((ru, rv)) => (u.clamp(-ru, ru), v.clamp(-rv, rv)),
            None => (u, v),
        }
    }

    pub fn lambda(&self, u: f64, v: f64) -> f64 {
        let (u, v) = self.clamp(u, v);
        (self.lambda)(u, v)
    }

    pub fn mu(&self, u: f64, v: f64) -> f64 {
        let (u, v) = self.clamp(u, v);
        (self.mu)(u, v)
    }

    pub fn speed_floor(&self) -> f64 {
        self.c
    }

    /// `[∂u λ, ∂v λ, ∂u μ, ∂v μ]` at `(u, v)`; central differences with step
    /// `1e-6` when no closed form is attached.
    pub fn partials(&self, u: f64, v: f64) -> [f64; 4] {
        if let Some(p) = &self.partials {
            return [p[0](u, v), p[1](u, v), p[2](u, v), p[3](u, v)];
        }
        let h = FD_STEP;
        let d = |f: &Speed2, du: f64, dv: f64| (f(u + du, v + dv) - f(u - du, v - dv)) / (2.0 * h);
        [
            d(&self.lambda, h, 0.0),
            d(&self.lambda, 0.0, h),
            d(&self.mu, h, 0.0),
            d(&self.mu, 0.0, h),
        ]
    }
}
