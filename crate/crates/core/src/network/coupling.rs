//! Junction conditions: the implicit boundary map at a multiple node and the
//! balancing of initial flows.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::interp1;
use crate::profile::Profile;
use crate::quasilinear::{measure_partials, permanent_entry, BoundaryMap};
use crate::saintvenant::{flow_rate, solve_u_for_flow, CanalParams};

/// Dense time samples of `(u_i(t, l_i), v_i(t, l_i))` for an edge feeding a
/// multiple node.
#[derive(Debug, Clone, PartialEq)]
pub struct UpstreamTrace {
    pub edge: usize,
    pub params: CanalParams,
    pub t_nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl UpstreamTrace {
    /// First sample time after which both traces are exactly zero.
    pub fn extinction(&self) -> Option<f64> {
        let both: Vec<f64> = self.u.iter().zip(&self.v).map(|(a, b)| a.abs().max(b.abs())).collect();
        permanent_entry(&self.t_nodes, both.into_iter(), 0.0)
    }

    fn at(&self, t: f64) -> (f64, f64) {
        (interp1(&self.t_nodes, &self.u, t), interp1(&self.t_nodes, &self.v, t))
    }
}

/// The map `h` with `u_{i0}(t, 0) = h(v_{i0}(t, 0), t)` at a multiple node.
#[derive(Debug, Clone)]
pub struct NodeMap {
    pub map: BoundaryMap,
    /// Set when an upstream trace never vanished on the horizon, so `T_h` is
    /// the horizon itself and `D2` reflects the measured tail.
    pub degraded: bool,
}

/// Builds the implicit map of `Q_{i0}(u, v) = Σ Q_i(u_i(t, l_i), v_i(t, l_i))`
/// for the edge `i0 = node` leaving the node.
pub fn multiple_node_map(
    node: usize,
    params: &CanalParams,
    upstream: &[UpstreamTrace],
    c: f64,
    horizon: f64,
) -> Result<NodeMap> {
    if upstream.is_empty() {
        return Err(Error::MissingTrace(node));
    }
    for tr in upstream {
        if tr.t_nodes.len() < 2 || tr.u.len() != tr.t_nodes.len() || tr.v.len() != tr.t_nodes.len() {
            return Err(Error::MissingTrace(tr.edge));
        }
    }
    let ups: Arc<Vec<UpstreamTrace>> = Arc::new(upstream.to_vec());
    let p = *params;
    let h = {
        let ups = ups.clone();
        move |v: f64, t: f64| -> f64 {
            let mut q = 0.0;
            let mut quiet = true;
            for tr in ups.iter() {
                let (a, b) = tr.at(t);
                quiet &= a == 0.0 && b == 0.0;
                q += flow_rate(a, b, &tr.params);
            }
            if quiet && v == 0.0 {
                return 0.0;
            }
            solve_u_for_flow(v, q, &p).unwrap_or(f64::NAN)
        }
    };
    let mut t_h = 0.0_f64;
    let mut degraded = false;
    for tr in upstream {
        match tr.extinction() {
            Some(t) => t_h = t_h.max(t),
            None => {
                degraded = true;
                t_h = horizon;
            }
        }
    }
    let radius = p.working_radius(c);
    let (d1, d2) = measure_partials(&h, radius, horizon, 101);
    if !(d1.is_finite() && d2.is_finite()) {
        return Err(Error::NewtonFailure(format!(
            "boundary map at node {node} is not finite on its box"
        )));
    }
    Ok(NodeMap {
        map: BoundaryMap::new(h, d1, d2, t_h),
        degraded,
    })
}

/// Adds `δ (1 - x/ρ)²` on `[0, ρ)`, `ρ = l/4`, to an initial velocity so that
/// the flow at `x = 0` equals `q_target`. The right end is untouched.
pub fn balance_inflow(h0: &Profile, v0: &Profile, q_target: f64) -> Profile {
    let l = v0.length();
    let rho = 0.25 * l;
    let delta = q_target / h0.eval(0.0) - v0.eval(0.0);
    let v0 = v0.clone();
    Profile::new(l, move |x| {
        let r = (1.0 - x / rho).max(0.0);
        v0.eval(x) + delta * r * r
    })
}
