//! The signed-power boundary law `w' = -K sgn(w) |w|^γ`.

use crate::error::{Error, Result};
use crate::profile::BoundaryTrace;

/// Gain `K > 0` and exponent `γ ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerFeedback {
    gain: f64,
    exponent: f64,
}

impl PowerFeedback {
    pub fn new(gain: f64, exponent: f64) -> Result<Self> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::InvalidFeedback(format!("gain must be positive, got {gain}")));
        }
        if !(exponent > 0.0 && exponent < 1.0) {
            return Err(Error::InvalidFeedback(format!(
                "exponent must lie in (0, 1), got {exponent}"
            )));
        }
        Ok(Self { gain, exponent })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Time to reach zero from `|w0| = amplitude`.
    pub fn extinction_time_from(&self, amplitude: f64) -> f64 {
        amplitude.abs().powf(1.0 - self.exponent) / ((1.0 - self.exponent) * self.gain)
    }

    /// `(C1, K C1^γ)`: bounds on the trace and on its derivative for any
    /// `|w0| ≤ C1`.
    pub fn trace_bounds(&self, c1: f64) -> (f64, f64) {
        (c1, self.gain * c1.powf(self.exponent))
    }

    pub fn trace(&self, w0: f64) -> FeedbackTrace {
        FeedbackTrace { w0, params: *self }
    }

    /// Right-hand side `-K sgn(w) |w|^γ`.
    pub fn rhs(&self, w: f64) -> f64 {
        -self.gain * w.signum() * w.abs().powf(self.exponent)
    }
}

/// The closed-form solution started at `w0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackTrace {
    w0: f64,
    params: PowerFeedback,
}

impl FeedbackTrace {
    pub fn initial(&self) -> f64 {
        self.w0
    }

    pub fn params(&self) -> PowerFeedback {
        self.params
    }

    pub fn extinction_time(&self) -> f64 {
        self.params.extinction_time_from(self.w0)
    }

    /// `sgn(w0) (|w0|^{1-γ} - (1-γ) K t)^{1/(1-γ)}` before extinction, 0 after.
    pub fn eval(&self, t: f64) -> f64 {
        // exact at the corner, where it must match the initial data
        if self.w0 == 0.0 || t <= 0.0 {
            return self.w0;
        }
        let p = 1.0 - self.params.exponent;
        let base = self.w0.abs().powf(p) - p * self.params.gain * t;
        if base <= 0.0 {
            return 0.0;
        }
        self.w0.signum() * base.powf(1.0 / p)
    }

    /// `d/dt eval(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        self.params.rhs(self.eval(t))
    }

    /// `(C1, K C1^γ)` for this trace, with `C1 = |w0|`.
    pub fn bounds(&self) -> (f64, f64) {
        self.params.trace_bounds(self.w0.abs())
    }

    pub fn to_boundary_trace(&self) -> BoundaryTrace {
        let me = *self;
        let (sup, lip) = self.bounds();
        BoundaryTrace::new(move |t| me.eval(t), sup, lip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_closed_form_values() {
        let fb = PowerFeedback::new(1.0, 0.5).unwrap();
        assert!((fb.trace(1.0).eval(1.0) - 0.25).abs() < 1e-15);
        assert_eq!(fb.trace(0.0).eval(3.0), 0.0);
        assert_eq!(fb.trace(-1.0).eval(2.0), 0.0);
        assert_eq!(fb.trace(-1.0).eval(5.0), 0.0);
        assert_eq!(fb.trace(-1.0).extinction_time(), 2.0);
    }

    #[test]
    fn test_extinction_time() {
        let fb = PowerFeedback::new(1.0, 0.5).unwrap();
        assert_eq!(fb.trace(1.0).extinction_time(), 2.0);
        assert_eq!(fb.trace(0.0).extinction_time(), 0.0);
        let fb = PowerFeedback::new(2.0, 0.5).unwrap();
        assert_eq!(fb.trace(0.25).extinction_time(), 0.5);
    }

    #[test]
    fn test_trace_bounds() {
        let fb = PowerFeedback::new(1.0, 0.5).unwrap();
        assert_eq!(fb.trace_bounds(1.0), (1.0, 1.0));
        assert_eq!(fb.trace_bounds(0.0), (0.0, 0.0));
        let (a, b) = fb.trace_bounds(0.04);
        assert_eq!(a, 0.04);
        assert!((b - 0.2).abs() < 1e-15);
    }

    #[test]
    fn test_rejects_bad_params() {
        assert!(PowerFeedback::new(0.0, 0.5).is_err());
        assert!(PowerFeedback::new(1.0, 1.0).is_err());
        assert!(PowerFeedback::new(1.0, 0.0).is_err());
    }
}
