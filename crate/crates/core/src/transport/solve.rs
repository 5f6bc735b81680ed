//! The transport solution on a tensor grid.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{interp1, Field, Grid};
use crate::profile::{BoundaryTrace, Profile};

use super::characteristic::{check_step, corner_tolerance, default_step, trace_to, Exit};
use super::coefficient::Coefficient;

/// Tuning knobs of [`solve_linear_transport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    /// RK4 step; defaults to the largest admissible one.
    pub step: Option<f64>,
    /// Number of time rows each node is traced back exactly before the
    /// entrance label is interpolated from an earlier row. `usize::MAX`
    /// traces every node all the way to its entrance.
    pub lookback: usize,
    /// Allowed mismatch between boundary and initial data at the corner.
    pub compat_tol: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            step: None,
            lookback: 16,
            compat_tol: 1e-8,
        }
    }
}

impl TransportOptions {
    pub fn exact() -> Self {
        Self {
            lookback: usize::MAX,
            ..Self::default()
        }
    }
}

/// Entrance labels on `grid`: the entrance time `e > 0` on J, and minus the
/// distance of the foot from the inflow boundary on I (zero on P).
///
/// The label is continuous across the corner characteristic, so it can be
/// interpolated between rows.
pub fn entrance_labels(a: &Coefficient, grid: &Grid, opts: &TransportOptions) -> Result<Field> {
    let step = grid_step(a, grid, opts);
    check_step(a, step)?;
    let d = a.domain();
    if grid.horizon() > d.horizon * (1.0 + 1e-12) || (grid.length() - d.length).abs() > 1e-12 * d.length {
        return Err(Error::InvalidDomain(format!(
            "grid [0,{}]x[0,{}] does not fit the coefficient domain [0,{}]x[0,{}]",
            grid.horizon(),
            grid.length(),
            d.horizon,
            d.length
        )));
    }
    let (nt, nx) = (grid.nt(), grid.nx());
    let ts = grid.t_nodes();
    let xs = grid.x_nodes();
    let mut labels = vec![0.0; nt * nx];
    for j in 0..nx {
        labels[j] = -a.to_reduced(xs[j]).max(0.0);
    }
    let lookback = opts.lookback.max(1);
    for k in 1..nt {
        let base = k.saturating_sub(lookback);
        let (done, rest) = labels.split_at_mut(k * nx);
        let base_row = &done[base * nx..(base + 1) * nx];
        let s_stop = ts[base];
        rest[..nx].par_iter_mut().enumerate().for_each(|(j, out)| {
            let xi = a.to_reduced(xs[j]).max(0.0);
            *out = match trace_to(a, ts[k], xi, s_stop, step, None) {
                Exit::Boundary(e) => e,
                Exit::Reached(xb) => {
                    if base == 0 {
                        -xb
                    } else {
                        interp1(xs, base_row, a.to_reduced(xb))
                    }
                }
            };
        });
    }
    Field::new(
        ts.to_vec(),
        xs.to_vec(),
        Array2::from_shape_vec((nt, nx), labels).unwrap(),
    )
}

/// Solves `∂t y + a ∂x y = 0` with `y(0, ·) = y0` and `y = y_bnd` on the
/// inflow boundary by evaluating the characteristic solution formula at
/// every grid node.
pub fn solve_linear_transport(
    a: &Coefficient,
    y0: &Profile,
    y_bnd: &BoundaryTrace,
    grid: &Grid,
    opts: &TransportOptions,
) -> Result<Field> {
    let inflow = a.direction().inflow(a.domain().length);
    let gap = (y_bnd.eval(0.0) - y0.eval(inflow)).abs();
    if gap > opts.compat_tol {
        return Err(Error::CompatibilityViolation {
            gap,
            tol: opts.compat_tol,
        });
    }
    let labels = entrance_labels(a, grid, opts)?;
    let step = grid_step(a, grid, opts);
    Ok(evaluate_labels(a, &labels, y0, y_bnd, corner_tolerance(step)))
}

/// The RK4 step used on `grid`: the requested one, or one grid cell's worth
/// of travel at the top speed.
pub(crate) fn grid_step(a: &Coefficient, grid: &Grid, opts: &TransportOptions) -> f64 {
    opts.step
        .unwrap_or_else(|| default_step(a).min(grid.dx() / a.sup_norm()))
}

/// Maps entrance labels to solution values.
pub(crate) fn evaluate_labels(
    a: &Coefficient,
    labels: &Field,
    y0: &Profile,
    y_bnd: &BoundaryTrace,
    tol_p: f64,
) -> Field {
    labels.map(|eta| {
        if eta > tol_p {
            y_bnd.eval(eta)
        } else {
            y0.eval(a.to_reduced((-eta).max(0.0)))
        }
    })
}

/// `M = max(L_l / c, L0) · max(1, ‖a‖∞) · e^{LT}`, the Lipschitz bound of the
/// transport solution.
pub fn lipschitz_bound(a: &Coefficient, l_bnd: f64, l0: f64) -> f64 {
    (l_bnd / a.speed_floor()).max(l0) * a.flow_lipschitz()
}
