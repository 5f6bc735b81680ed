//! Leaves-to-root solution of a canal network.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::PowerFeedback;
use crate::grid::{Field, Grid};
use crate::profile::Profile;
use crate::quasilinear::{
    check_one_control, check_two_control, fields_extinction, ClosedLoopProblem, ClosedLoopSolution, ConditionCheck,
    ExtinctionReport, LeftClosure, PicardOptions,
};
use crate::saintvenant::{
    flow_rate, from_riemann, pick_c, simple_node_map, to_riemann, CanalParams, PhysicalState, RiemannPair,
};

use super::coupling::{balance_inflow, multiple_node_map, UpstreamTrace};
use super::tree::CanalTree;

/// How the inflow end of a leaf edge is operated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafKind {
    /// A gate realizing the feedback law on `u`.
    #[default]
    Controlled,
    /// The inflow rate is held at its equilibrium value.
    FlowRate,
}

/// One canal: equilibrium and initial Riemann profiles.
#[derive(Debug, Clone)]
pub struct EdgeData {
    pub params: CanalParams,
    pub u0: Profile,
    pub v0: Profile,
}

impl EdgeData {
    /// Converts initial depth and velocity profiles to Riemann variables.
    pub fn from_physical(params: CanalParams, h0: &Profile, v0: &Profile) -> Result<Self> {
        let l = params.length;
        for x in h0.sample_uniform(1001) {
            if !(x > 0.0) {
                return Err(Error::NonpositiveDepth(x));
            }
        }
        let (hu, vu) = (h0.clone(), v0.clone());
        let (hv, vv) = (h0.clone(), v0.clone());
        let u = Profile::new(l, move |x| {
            to_riemann(
                PhysicalState {
                    h: hu.eval(x),
                    v: vu.eval(x),
                },
                &params,
            )
            .map(|r| r.u)
            .unwrap_or(f64::NAN)
        });
        let v = Profile::new(l, move |x| {
            to_riemann(
                PhysicalState {
                    h: hv.eval(x),
                    v: vv.eval(x),
                },
                &params,
            )
            .map(|r| r.v)
            .unwrap_or(f64::NAN)
        });
        Ok(Self { params, u0: u, v0: v })
    }
}

/// Everything needed to run a network.
#[derive(Debug, Clone)]
pub struct NetworkScenario {
    pub tree: CanalTree,
    /// Edge `i` at index `i - 1`.
    pub edges: Vec<EdgeData>,
    /// Kinds of the leaf nodes; unlisted leaves are controlled.
    pub leaf_kinds: BTreeMap<usize, LeafKind>,
    pub feedback: PowerFeedback,
    pub nx: usize,
    pub nt: usize,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkOptions {
    pub picard: PicardOptions,
    /// Largest admissible flow mismatch at a multiple node.
    pub coupling_tol: f64,
    /// Threshold for the reported extinction times.
    pub extinction_tol: f64,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            picard: PicardOptions {
                tol: 1e-12,
                max_iter: 100,
                ..PicardOptions::default()
            },
            coupling_tol: 1e-9,
            extinction_tol: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InflowKind {
    Controlled,
    FlowRate,
    Junction { degraded: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeChecks {
    pub two_control: Option<ConditionCheck>,
    pub one_control: Option<(ConditionCheck, ConditionCheck)>,
}

#[derive(Debug, Clone)]
pub struct EdgeResult {
    pub edge: usize,
    pub inflow: InflowKind,
    pub solution: ClosedLoopSolution,
    pub depth: Field,
    pub velocity: Field,
    pub extinction: ExtinctionReport,
    pub checks: EdgeChecks,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeResidual {
    pub node: usize,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NetworkSolution {
    pub c: f64,
    pub t_star: f64,
    pub depth: usize,
    pub horizon: f64,
    /// `p · max l_i / c + t*`.
    pub extinction_bound: f64,
    pub edges: Vec<EdgeResult>,
    pub nodes: Vec<NodeResidual>,
    /// Largest `sup|u| + sup|v|` over edges at the extinction bound.
    pub sup_at_bound: f64,
    /// Time after which every edge stays below the extinction threshold.
    pub extinction_time: Option<f64>,
}

/// Adjusts the initial velocities at the inflow ends so that the initial
/// flows balance at every multiple node, and match `Q*` at flow-rate leaves.
/// Profiles are physical `(H0, V0)` per edge.
pub fn balance_junctions(
    tree: &CanalTree,
    params: &[CanalParams],
    initial: &mut [(Profile, Profile)],
    leaf_kinds: &BTreeMap<usize, LeafKind>,
) {
    for i in 1..=tree.edge_count() {
        let target = if tree.is_multiple(i) {
            Some(
                tree.incoming(i)
                    .iter()
                    .map(|&j| {
                        let (h, v) = &initial[j - 1];
                        let l = params[j - 1].length;
                        h.eval(l) * v.eval(l)
                    })
                    .sum::<f64>(),
            )
        } else if leaf_kinds.get(&i).copied().unwrap_or_default() == LeafKind::FlowRate {
            Some(params[i - 1].q_star())
        } else {
            None
        };
        if let Some(q) = target {
            let (h, v) = &initial[i - 1];
            let v_new = balance_inflow(h, v, q);
            initial[i - 1].1 = v_new;
        }
    }
}

/// Checks the equilibrium balance at every multiple node.
fn check_equilibrium_balance(tree: &CanalTree, params: &[CanalParams]) -> Result<()> {
    for &n in tree.multiple_nodes() {
        let q_in: f64 = tree.incoming(n).iter().map(|&j| params[j - 1].q_star()).sum();
        let q_out = params[n - 1].q_star();
        if (q_in - q_out).abs() > 1e-12 * q_out.abs().max(1.0) {
            return Err(Error::InvalidTree(vec![format!(
                "equilibrium flows do not balance at node {n}: in {q_in}, out {q_out}"
            )]));
        }
    }
    Ok(())
}

fn edge_trace(params: &[CanalParams], done: &BTreeMap<usize, EdgeResult>, j: usize) -> Result<UpstreamTrace> {
    let r = done.get(&j).ok_or(Error::MissingTrace(j))?;
    let u = &r.solution.u;
    let last = u.nx() - 1;
    Ok(UpstreamTrace {
        edge: j,
        params: params[j - 1],
        t_nodes: u.t_nodes().to_vec(),
        u: u.column(last).to_vec(),
        v: r.solution.v.column(last).to_vec(),
    })
}

fn physical_fields(sol: &ClosedLoopSolution, p: &CanalParams) -> Result<(Field, Field)> {
    let mut h = sol.u.clone();
    let mut v = sol.u.clone();
    for ((idx, hv), vv) in h.values_mut().indexed_iter_mut().zip(v.values_mut().iter_mut()) {
        let s = from_riemann(
            RiemannPair {
                u: sol.u.at(idx.0, idx.1),
                v: sol.v.at(idx.0, idx.1),
            },
            p,
        )?;
        *hv = s.h;
        *vv = s.v;
    }
    Ok((h, v))
}

/// Solves every edge from the leaves to the root and checks conservation at
/// the junctions.
pub fn simulate_network(scenario: &NetworkScenario, opts: &NetworkOptions) -> Result<NetworkSolution> {
    let tree = &scenario.tree;
    if scenario.edges.len() != tree.edge_count() {
        return Err(Error::InvalidTree(vec![format!(
            "{} edges in the tree but data for {}",
            tree.edge_count(),
            scenario.edges.len()
        )]));
    }
    let params: Vec<CanalParams> = scenario.edges.iter().map(|e| e.params).collect();
    for (k, (p, e)) in params.iter().zip(tree.edges()).enumerate() {
        if (p.length - e.length).abs() > 1e-12 * e.length {
            return Err(Error::InvalidTree(vec![format!(
                "edge {}: canal length {} differs from tree length {}",
                k + 1,
                p.length,
                e.length
            )]));
        }
    }
    check_equilibrium_balance(tree, &params)?;
    let c = pick_c(&params)?;
    let (c1, c2) = opts.picard.bounds.unwrap_or_else(|| {
        scenario.edges.iter().fold((0.0_f64, 0.0_f64), |(a, b), e| {
            (
                a.max(e.u0.sup()).max(e.v0.sup()),
                b.max(e.u0.lipschitz()).max(e.v0.lipschitz()),
            )
        })
    });
    let fb = scenario.feedback;
    let t_star = fb.extinction_time_from(c1);
    let depth = tree.depth();
    let bound = depth as f64 * tree.max_length() / c + t_star;
    let horizon = scenario.horizon.unwrap_or(1.2 * bound);
    let picard = PicardOptions {
        bounds: Some((c1, c2)),
        ..opts.picard
    };

    let mut done: BTreeMap<usize, EdgeResult> = BTreeMap::new();
    for stratum in tree.strata() {
        let solved: Vec<Result<EdgeResult>> = stratum
            .par_iter()
            .map(|&i| {
                solve_edge(scenario, &params, &done, i, c, horizon, bound, &picard, opts).map_err(|e| e.on_edge(i))
            })
            .collect();
        for r in solved {
            let r = r?;
            done.insert(r.edge, r);
        }
    }

    let mut nodes = Vec::new();
    for &n in tree.multiple_nodes() {
        let out = &done[&n];
        let nt = out.solution.u.nt();
        let residuals: Vec<f64> = (0..nt)
            .map(|k| {
                let q_out = flow_rate(out.solution.u.at(k, 0), out.solution.v.at(k, 0), &params[n - 1]);
                let q_in: f64 = tree
                    .incoming(n)
                    .iter()
                    .map(|&j| {
                        let s = &done[&j].solution;
                        let last = s.u.nx() - 1;
                        flow_rate(s.u.at(k, last), s.v.at(k, last), &params[j - 1])
                    })
                    .sum();
                (q_out - q_in).abs()
            })
            .collect();
        let max_residual = residuals.iter().fold(0.0_f64, |m, &r| m.max(r));
        if max_residual > opts.coupling_tol {
            return Err(Error::CouplingResidualExceeded {
                node: n,
                residual: max_residual,
                tol: opts.coupling_tol,
            });
        }
        nodes.push(NodeResidual {
            node: n,
            max_residual,
            residuals,
        });
    }

    let edges: Vec<EdgeResult> = done.into_values().collect();
    let sup_at_bound = edges
        .iter()
        .map(|e| e.extinction.sup_u + e.extinction.sup_v)
        .fold(0.0_f64, f64::max);
    let extinction_time = edges
        .iter()
        .map(|e| e.extinction.interior_entry)
        .try_fold(0.0_f64, |m, t| t.map(|t| m.max(t)));
    Ok(NetworkSolution {
        c,
        t_star,
        depth,
        horizon,
        extinction_bound: bound,
        edges,
        nodes,
        sup_at_bound,
        extinction_time,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_edge(
    scenario: &NetworkScenario,
    params: &[CanalParams],
    done: &BTreeMap<usize, EdgeResult>,
    i: usize,
    c: f64,
    horizon: f64,
    bound: f64,
    picard: &PicardOptions,
    opts: &NetworkOptions,
) -> Result<EdgeResult> {
    let tree = &scenario.tree;
    let data = &scenario.edges[i - 1];
    let p = params[i - 1];
    let (left, inflow) = if tree.is_multiple(i) {
        let ups = tree
            .incoming(i)
            .iter()
            .map(|&j| edge_trace(params, done, j))
            .collect::<Result<Vec<_>>>()?;
        let m = multiple_node_map(i, &p, &ups, c, horizon)?;
        (LeftClosure::Map(m.map), InflowKind::Junction { degraded: m.degraded })
    } else {
        match scenario.leaf_kinds.get(&i).copied().unwrap_or_default() {
            LeafKind::Controlled => (LeftClosure::Feedback, InflowKind::Controlled),
            LeafKind::FlowRate => (LeftClosure::Map(simple_node_map(&p, c)?), InflowKind::FlowRate),
        }
    };
    let problem = ClosedLoopProblem {
        system: p.diagonal_system(c)?,
        u0: data.u0.clone(),
        v0: data.v0.clone(),
        feedback: scenario.feedback,
        left,
        grid: Grid::uniform(horizon, p.length, scenario.nt, scenario.nx)?,
    };
    let solution = problem.solve(picard)?;
    let checks = match problem.left {
        LeftClosure::Feedback => EdgeChecks {
            two_control: Some(check_two_control(&solution.ledger)),
            one_control: None,
        },
        LeftClosure::Map(_) => EdgeChecks {
            two_control: None,
            one_control: Some(check_one_control(&solution.ledger)),
        },
    };
    let (depth, velocity) = physical_fields(&solution, &p)?;
    let extinction = fields_extinction(&solution.u, &solution.v, bound, opts.extinction_tol);
    Ok(EdgeResult {
        edge: i,
        inflow,
        solution,
        depth,
        velocity,
        extinction,
        checks,
    })
}
