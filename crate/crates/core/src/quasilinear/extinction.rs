//! Post-hoc extinction diagnostics.

use serde::Serialize;

use crate::grid::Field;

use super::picard::ClosedLoopSolution;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtinctionReport {
    pub t_check: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    /// First time after which `|u(·, 0)| ≤ tol` for good.
    pub u_left_entry: Option<f64>,
    /// First time after which `|v(·, L)| ≤ tol` for good.
    pub v_right_entry: Option<f64>,
    /// First time after which `sup|u(t,·)| + sup|v(t,·)| ≤ tol` for good.
    pub interior_entry: Option<f64>,
}

/// First sample time from which `values` stays within `[-tol, tol]`.
pub fn permanent_entry(
    t_nodes: &[f64],
    values: impl DoubleEndedIterator<Item = f64> + ExactSizeIterator,
    tol: f64,
) -> Option<f64> {
    let n = values.len();
    let mut first = None;
    for (k, v) in values.enumerate().rev() {
        if v.abs() > tol {
            break;
        }
        first = Some(k);
    }
    debug_assert_eq!(n, t_nodes.len());
    first.map(|k| t_nodes[k])
}

/// Sup norms of `u`, `v` at the first sample `≥ t_check`, and the permanent
/// entry times of the boundary traces and of the whole state.
pub fn verify_extinction(sol: &ClosedLoopSolution, t_check: f64, tol: f64) -> ExtinctionReport {
    fields_extinction(&sol.u, &sol.v, t_check, tol)
}

pub fn fields_extinction(u: &Field, v: &Field, t_check: f64, tol: f64) -> ExtinctionReport {
    let ts = u.t_nodes();
    let k = ts.iter().position(|&t| t >= t_check - 1e-12).unwrap_or(ts.len() - 1);
    let total: Vec<f64> = (0..u.nt()).map(|k| u.row_sup(k) + v.row_sup(k)).collect();
    ExtinctionReport {
        t_check: ts[k],
        sup_u: u.row_sup(k),
        sup_v: v.row_sup(k),
        u_left_entry: permanent_entry(ts, u.column(0).iter().copied(), tol),
        v_right_entry: permanent_entry(ts, v.column(v.nx() - 1).iter().copied(), tol),
        interior_entry: permanent_entry(ts, total.into_iter(), tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_permanent_entry() {
        let ts = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(permanent_entry(&ts, [1.0, 0.0, 1.0, 0.0].into_iter(), 0.1), Some(3.0));
        assert_eq!(permanent_entry(&ts, [1.0, 1.0, 0.0, 0.0].into_iter(), 0.1), Some(2.0));
        assert_eq!(permanent_entry(&ts, [1.0, 1.0, 1.0, 1.0].into_iter(), 0.1), None);
    }
}
