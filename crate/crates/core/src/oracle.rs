//! First-order upwind finite volumes, kept independent of the
//! characteristics machinery for cross-validation.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::feedback::PowerFeedback;
use crate::grid::Field;
use crate::profile::{BoundaryTrace, Profile};
use crate::quasilinear::{BoundaryMap, DiagonalSystem};
use crate::transport::{Coefficient, Direction};

/// Largest admissible CFL number.
pub const CFL_LIMIT: f64 = 0.9;

/// `cells` uniform cells on `[0, length]`, marched with step `dt` up to
/// `horizon` (the last step is shortened to land on it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpwindGrid {
    pub cells: usize,
    pub dt: f64,
    pub length: f64,
    pub horizon: f64,
}

impl UpwindGrid {
    /// Chooses `dt` so that `max_speed · dt / dx = cfl`.
    pub fn with_cfl(cells: usize, length: f64, horizon: f64, max_speed: f64, cfl: f64) -> Result<Self> {
        if cells < 2 || !(length > 0.0 && horizon > 0.0 && max_speed > 0.0) {
            return Err(Error::InvalidDomain(
                "upwind grid needs cells ≥ 2 and positive sizes".into(),
            ));
        }
        if cfl > CFL_LIMIT {
            return Err(Error::CflViolation { cfl, limit: CFL_LIMIT });
        }
        let dx = length / cells as f64;
        Ok(Self {
            cells,
            dt: cfl * dx / max_speed,
            length,
            horizon,
        })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.cells).map(|j| (j as f64 + 0.5) * dx).collect()
    }

    fn times(&self) -> Vec<f64> {
        let n = (self.horizon / self.dt * (1.0 - 1e-12)).ceil() as usize;
        let mut ts: Vec<f64> = (0..n).map(|k| k as f64 * self.dt).collect();
        ts.push(self.horizon);
        ts
    }

    fn check_cfl(&self, speed: f64) -> Result<()> {
        let cfl = speed * self.dt / self.dx();
        if cfl > CFL_LIMIT * (1.0 + 1e-12) {
            return Err(Error::CflViolation { cfl, limit: CFL_LIMIT });
        }
        Ok(())
    }
}

/// Upwind solution of `∂t y + a ∂x y = 0` with a ghost cell carrying the
/// boundary trace. Values are cell averages at cell centers.
pub fn upwind_linear(a: &Coefficient, y0: &Profile, y_bnd: &BoundaryTrace, grid: &UpwindGrid) -> Result<Field> {
    grid.check_cfl(a.sup_norm())?;
    let xs = grid.centers();
    let ts = grid.times();
    let n = xs.len();
    let mut out = Array2::zeros((ts.len(), n));
    let mut y: Vec<f64> = xs.iter().map(|&x| y0.eval(x)).collect();
    out.row_mut(0).assign(&ndarray::ArrayView1::from(&y));
    let dx = grid.dx();
    let mut next = y.clone();
    for k in 1..ts.len() {
        let t = ts[k - 1];
        let dt = ts[k] - t;
        let ghost = y_bnd.eval(t);
        for j in 0..n {
            let s = a.eval(t, xs[j]);
            let r = s.abs() * dt / dx;
            let upwind = match a.direction() {
                Direction::Positive => {
                    if j == 0 {
                        ghost
                    } else {
                        y[j - 1]
                    }
                }
                Direction::Negative => {
                    if j + 1 == n {
                        ghost
                    } else {
                        y[j + 1]
                    }
                }
            };
            next[j] = y[j] - r * (y[j] - upwind);
        }
        std::mem::swap(&mut y, &mut next);
        out.row_mut(k).assign(&ndarray::ArrayView1::from(&y));
    }
    Field::new(ts, xs, out)
}

/// Boundary closures of the closed-loop upwind scheme.
#[derive(Debug, Clone)]
pub enum OracleClosure {
    /// Feedback on both ends.
    TwoControl,
    /// `u(t, 0) = h(v(t, 0), t)` from the first cell's `v`, feedback on the right.
    OneControl(BoundaryMap),
}

/// Upwind solution of the closed-loop diagonal system, with speeds frozen at
/// the current time level.
pub fn upwind_closed_loop(
    system: &DiagonalSystem,
    u0: &Profile,
    v0: &Profile,
    closure: &OracleClosure,
    fb: PowerFeedback,
    grid: &UpwindGrid,
) -> Result<(Field, Field)> {
    let xs = grid.centers();
    let ts = grid.times();
    let n = xs.len();
    let dx = grid.dx();
    let mut u: Vec<f64> = xs.iter().map(|&x| u0.eval(x)).collect();
    let mut v: Vec<f64> = xs.iter().map(|&x| v0.eval(x)).collect();
    let mut out_u = Array2::zeros((ts.len(), n));
    let mut out_v = Array2::zeros((ts.len(), n));
    out_u.row_mut(0).assign(&ndarray::ArrayView1::from(&u));
    out_v.row_mut(0).assign(&ndarray::ArrayView1::from(&v));
    let u_trace = fb.trace(u0.eval(0.0));
    let v_trace = fb.trace(v0.eval(grid.length));
    let (mut nu, mut nv) = (u.clone(), v.clone());
    let mut lam = vec![0.0; n];
    let mut mu = vec![0.0; n];
    for k in 1..ts.len() {
        let t = ts[k - 1];
        let dt = ts[k] - t;
        let mut top = 0.0_f64;
        for j in 0..n {
            lam[j] = system.lambda(u[j], v[j]);
            mu[j] = system.mu(u[j], v[j]);
            if !(lam[j] > 0.0 && mu[j] < 0.0) {
                return Err(Error::BoxExit(if lam[j] > 0.0 { mu[j] } else { lam[j] }));
            }
            top = top.max(lam[j]).max(-mu[j]);
        }
        let cfl = top * dt / dx;
        if cfl > CFL_LIMIT * (1.0 + 1e-12) {
            return Err(Error::CflViolation { cfl, limit: CFL_LIMIT });
        }
        let ghost_u = match closure {
            OracleClosure::TwoControl => u_trace.eval(t),
            OracleClosure::OneControl(h) => h.eval(v[0], t),
        };
        let ghost_v = v_trace.eval(t);
        for j in 0..n {
            let ul = if j == 0 { ghost_u } else { u[j - 1] };
            let vr = if j + 1 == n { ghost_v } else { v[j + 1] };
            nu[j] = u[j] - lam[j] * dt / dx * (u[j] - ul);
            nv[j] = v[j] - mu[j] * dt / dx * (vr - v[j]);
        }
        std::mem::swap(&mut u, &mut nu);
        std::mem::swap(&mut v, &mut nv);
        out_u.row_mut(k).assign(&ndarray::ArrayView1::from(&u));
        out_v.row_mut(k).assign(&ndarray::ArrayView1::from(&v));
    }
    Ok((Field::new(ts.clone(), xs.clone(), out_u)?, Field::new(ts, xs, out_v)?))
}

/// `(L¹, L∞)` distance between an upwind field and a reference field sampled
/// bilinearly at the upwind nodes; the `L¹` norm is taken in space and
/// maximized over time.
pub fn distance_to(oracle: &Field, reference: &Field) -> (f64, f64) {
    let xs = oracle.x_nodes();
    let dx = if xs.len() > 1 { xs[1] - xs[0] } else { 0.0 };
    let mut l1 = 0.0_f64;
    let mut linf = 0.0_f64;
    for (k, &t) in oracle.t_nodes().iter().enumerate() {
        let mut row = 0.0;
        for (j, &x) in xs.iter().enumerate() {
            let d = (oracle.at(k, j) - reference.sample(t, x)).abs();
            row += d * dx;
            linf = linf.max(d);
        }
        l1 = l1.max(row);
    }
    (l1, linf)
}
