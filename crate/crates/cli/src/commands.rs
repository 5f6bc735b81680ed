//! The `verify`, `simulate` and `compare` commands.

use std::path::Path;

use serde::Serialize;

use hypstab_core::feedback::PowerFeedback;
use hypstab_core::grid::{Field, Grid};
use hypstab_core::network::{simulate_network, InflowKind, LeafKind, NetworkOptions, NetworkScenario, NetworkSolution};
use hypstab_core::oracle::{distance_to, upwind_closed_loop, OracleClosure, UpwindGrid};
use hypstab_core::quasilinear::{
    build_ledger, check_one_control, check_two_control, fields_extinction, BoundaryMap, ClosedLoopProblem,
    ClosedLoopSolution, ConditionCheck, ConstantsLedger, DiagonalSystem, ExtinctionReport, LeftClosure, PicardOptions,
};
use hypstab_core::saintvenant::{flow_rate, pick_c, simple_node_map, CanalParams};
use hypstab_core::Profile;

use crate::error::{CliError, Result};
use crate::output::Artifacts;
use crate::scenario::{EdgeModel, LeftEnd, Model, Scenario};

const DEFAULT_EXTINCTION_TOL: f64 = 5e-3;
/// CFL number of the upwind runs in `compare`, against 1.1 × the ledger's M1.
const COMPARE_CFL: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub holds: bool,
    pub margin: f64,
}

fn conditions_of(ledger: &ConstantsLedger, one_control: bool) -> Vec<Condition> {
    let named = |name, c: ConditionCheck| Condition {
        name,
        holds: c.holds,
        margin: c.margin,
    };
    if one_control {
        let (a, b) = check_one_control(ledger);
        vec![named("c3_prime_bound", a), named("c3_dblprime_bound", b)]
    } else {
        vec![named("two_control_bound", check_two_control(ledger))]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeVerification {
    pub edge: usize,
    pub closure: &'static str,
    /// Junction edges are checked with the simple-node map of the edge in
    /// place of the junction map, whose time dependence is only known after
    /// the upstream edges have been solved.
    pub provisional: bool,
    pub ledger: ConstantsLedger,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub edges: Vec<EdgeVerification>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn failing_edges(&self) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.conditions.iter().any(|c| !c.holds))
            .map(|e| e.edge)
            .collect()
    }
}

/// Sup and Lipschitz bounds over a set of profiles.
fn measured_bounds<'a>(profiles: impl Iterator<Item = &'a Profile>) -> (f64, f64) {
    profiles.fold((0.0_f64, 0.0_f64), |(s, l), p| (s.max(p.sup()), l.max(p.lipschitz())))
}

fn ledger_bounds(scenario: &Scenario, measured: (f64, f64)) -> (f64, f64) {
    (
        scenario.file.run.c1.unwrap_or(measured.0),
        scenario.file.run.c2.unwrap_or(measured.1),
    )
}

fn network_bounds(scenario: &Scenario, net: &NetworkScenario) -> (f64, f64) {
    ledger_bounds(scenario, measured_bounds(net.edges.iter().flat_map(|e| [&e.u0, &e.v0])))
}

fn edge_bounds(scenario: &Scenario, e: &EdgeModel) -> (f64, f64) {
    ledger_bounds(scenario, measured_bounds([&e.u0, &e.v0].into_iter()))
}

fn left_map(e: &EdgeModel) -> Option<BoundaryMap> {
    match e.left {
        LeftEnd::Feedback => None,
        LeftEnd::Reflection => Some(BoundaryMap::reflection()),
    }
}

pub fn verify(scenario: &Scenario) -> Result<VerifyReport> {
    let fb = scenario.feedback;
    let mut edges = Vec::new();
    match &scenario.model {
        Model::Network(net) => {
            let params: Vec<CanalParams> = net.edges.iter().map(|e| e.params).collect();
            let c = pick_c(&params)?;
            let (c1, c2) = network_bounds(scenario, net);
            let t_star = fb.extinction_time_from(c1);
            for (k, p) in params.iter().enumerate() {
                let i = k + 1;
                let system = p.diagonal_system(c)?;
                let (closure, map, provisional) = if net.tree.is_multiple(i) {
                    let (sub, _) = net.tree.subtree(i)?;
                    let quiet = (sub.depth() - 1) as f64 * sub.max_length() / c + t_star;
                    let simple = simple_node_map(p, c)?;
                    let d1 = simple.d1();
                    let map = BoundaryMap::new(move |v, t| simple.eval(v, t), d1, 0.0, quiet);
                    ("junction", Some(map), true)
                } else {
                    match net.leaf_kinds.get(&i).copied().unwrap_or_default() {
                        LeafKind::Controlled => ("controlled", None, false),
                        LeafKind::FlowRate => ("flow_rate", Some(simple_node_map(p, c)?), false),
                    }
                };
                let ledger = build_ledger(&system, c1, c2, fb, p.length, map.as_ref())?;
                edges.push(EdgeVerification {
                    edge: i,
                    closure,
                    provisional,
                    conditions: conditions_of(&ledger, map.is_some()),
                    ledger,
                });
            }
        }
        Model::Edge(e) => {
            let (c1, c2) = edge_bounds(scenario, e);
            let map = left_map(e);
            let ledger = build_ledger(&e.system, c1, c2, fb, e.length, map.as_ref())?;
            edges.push(EdgeVerification {
                edge: 1,
                closure: if map.is_some() { "reflection" } else { "controlled" },
                provisional: false,
                conditions: conditions_of(&ledger, map.is_some()),
                ledger,
            });
        }
    }
    let all_pass = edges.iter().all(|e| e.conditions.iter().all(|c| c.holds));
    Ok(VerifyReport { edges, all_pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeReport {
    pub edge: usize,
    pub inflow: String,
    pub iterations: usize,
    pub final_residual: f64,
    pub ledger: ConstantsLedger,
    pub conditions: Vec<Condition>,
    pub extinction: ExtinctionReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeReport {
    pub node: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub system: &'static str,
    pub seed: u64,
    pub c: f64,
    pub t_star: f64,
    pub horizon: f64,
    pub nx: usize,
    pub nt: usize,
    /// Time by which the state must vanish: `p · max l / c + t*` for
    /// networks of depth `p`, the ledger's `T` for a single diagonal edge.
    pub extinction_bound: f64,
    /// Time after which every edge stays below `extinction_tol`.
    pub extinction_time: Option<f64>,
    pub extinction_tol: f64,
    pub sup_at_bound: f64,
    pub edges: Vec<EdgeReport>,
    pub nodes: Vec<NodeReport>,
    pub all_conditions_hold: bool,
}

fn system_name(scenario: &Scenario) -> &'static str {
    match &scenario.file.system {
        crate::scenario::SystemSpec::SaintVenant { .. } => "saint_venant",
        crate::scenario::SystemSpec::Affine { .. } => "affine",
        crate::scenario::SystemSpec::Tabulated { .. } => "tabulated",
    }
}

fn picard_options(scenario: &Scenario, defaults: PicardOptions) -> PicardOptions {
    let run = &scenario.file.run;
    PicardOptions {
        tol: run.tol.unwrap_or(defaults.tol),
        max_iter: run.max_iter.unwrap_or(defaults.max_iter),
        ..defaults
    }
}

/// Solution fields of one edge.
pub struct EdgeOutput {
    pub edge: usize,
    pub solution: ClosedLoopSolution,
    /// Depth and velocity, for canals.
    pub physical: Option<(Field, Field)>,
}

/// A finished run, before it is written out.
pub struct Run {
    pub report: SimulationReport,
    pub fields: Vec<EdgeOutput>,
    pub params: Option<Vec<CanalParams>>,
}

fn run_network(scenario: &Scenario, net: &NetworkScenario) -> Result<Run> {
    let run = &scenario.file.run;
    let params: Vec<CanalParams> = net.edges.iter().map(|e| e.params).collect();
    let c = pick_c(&params)?;
    let (c1, c2) = network_bounds(scenario, net);
    let t_star = scenario.feedback.extinction_time_from(c1);
    let bound = net.tree.depth() as f64 * net.tree.max_length() / c + t_star;
    let horizon = run.horizon.unwrap_or(1.2 * bound);
    let top_speed = params
        .iter()
        .map(|p| p.v_star + p.celerity_star() + c)
        .fold(0.0, f64::max);
    let nt = scenario.time_samples(horizon, top_speed, net.tree.max_length());
    let mut opts = NetworkOptions::default();
    opts.picard = picard_options(scenario, opts.picard);
    opts.picard.bounds = Some((c1, c2));
    opts.coupling_tol = run.coupling_tol.unwrap_or(opts.coupling_tol);
    opts.extinction_tol = run.extinction_tol.unwrap_or(opts.extinction_tol);
    let sc = NetworkScenario {
        nt,
        horizon: Some(horizon),
        ..net.clone()
    };
    let sol: NetworkSolution = simulate_network(&sc, &opts)?;
    let mut edges = Vec::new();
    let mut fields = Vec::new();
    for e in sol.edges {
        let one_control = e.checks.one_control.is_some();
        let inflow = match e.inflow {
            InflowKind::Controlled => "controlled".to_string(),
            InflowKind::FlowRate => "flow_rate".to_string(),
            InflowKind::Junction { degraded: false } => "junction".to_string(),
            InflowKind::Junction { degraded: true } => "junction (degraded)".to_string(),
        };
        edges.push(EdgeReport {
            edge: e.edge,
            inflow,
            iterations: e.solution.iterations,
            final_residual: e.solution.residual_history.last().copied().unwrap_or(0.0),
            conditions: conditions_of(&e.solution.ledger, one_control),
            ledger: e.solution.ledger.clone(),
            extinction: e.extinction,
        });
        fields.push(EdgeOutput {
            edge: e.edge,
            solution: e.solution,
            physical: Some((e.depth, e.velocity)),
        });
    }
    let all_conditions_hold = edges.iter().all(|e| e.conditions.iter().all(|c| c.holds));
    Ok(Run {
        report: SimulationReport {
            system: system_name(scenario),
            seed: run.seed,
            c: sol.c,
            t_star: sol.t_star,
            horizon: sol.horizon,
            nx: sc.nx,
            nt,
            extinction_bound: sol.extinction_bound,
            extinction_time: sol.extinction_time,
            extinction_tol: opts.extinction_tol,
            sup_at_bound: sol.sup_at_bound,
            edges,
            nodes: sol
                .nodes
                .iter()
                .map(|n| NodeReport {
                    node: n.node,
                    max_residual: n.max_residual,
                })
                .collect(),
            all_conditions_hold,
        },
        fields,
        params: Some(params),
    })
}

fn edge_problem(scenario: &Scenario, e: &EdgeModel) -> Result<(ClosedLoopProblem, PicardOptions)> {
    let (c1, c2) = edge_bounds(scenario, e);
    let map = left_map(e);
    let ledger = build_ledger(&e.system, c1, c2, scenario.feedback, e.length, map.as_ref())?;
    let horizon = scenario.file.run.horizon.unwrap_or(1.2 * ledger.horizon);
    let nt = scenario.time_samples(horizon, ledger.m1, e.length);
    let grid = Grid::uniform(horizon, e.length, nt, scenario.file.grid.nx)?;
    let problem = ClosedLoopProblem {
        system: e.system.clone(),
        u0: e.u0.clone(),
        v0: e.v0.clone(),
        feedback: scenario.feedback,
        left: match map {
            Some(m) => LeftClosure::Map(m),
            None => LeftClosure::Feedback,
        },
        grid,
    };
    let opts = PicardOptions {
        bounds: Some((c1, c2)),
        ..picard_options(scenario, PicardOptions::default())
    };
    Ok((problem, opts))
}

fn run_edge(scenario: &Scenario, e: &EdgeModel) -> Result<Run> {
    let (problem, opts) = edge_problem(scenario, e)?;
    let sol = problem.solve(&opts)?;
    let tol = scenario.file.run.extinction_tol.unwrap_or(DEFAULT_EXTINCTION_TOL);
    let bound = sol.ledger.horizon;
    let extinction = fields_extinction(&sol.u, &sol.v, bound, tol);
    let one_control = e.left == LeftEnd::Reflection;
    let conditions = conditions_of(&sol.ledger, one_control);
    let all_conditions_hold = conditions.iter().all(|c| c.holds);
    let report = SimulationReport {
        system: system_name(scenario),
        seed: scenario.file.run.seed,
        c: sol.ledger.c,
        t_star: sol.ledger.t_star,
        horizon: problem.grid.horizon(),
        nx: problem.grid.nx(),
        nt: problem.grid.nt(),
        extinction_bound: bound,
        extinction_time: extinction.interior_entry,
        extinction_tol: tol,
        sup_at_bound: extinction.sup_u + extinction.sup_v,
        edges: vec![EdgeReport {
            edge: 1,
            inflow: if one_control { "reflection" } else { "controlled" }.to_string(),
            iterations: sol.iterations,
            final_residual: sol.residual_history.last().copied().unwrap_or(0.0),
            ledger: sol.ledger.clone(),
            conditions,
            extinction,
        }],
        nodes: Vec::new(),
        all_conditions_hold,
    };
    Ok(Run {
        report,
        fields: vec![EdgeOutput {
            edge: 1,
            solution: sol,
            physical: None,
        }],
        params: None,
    })
}

/// Solves the scenario without writing anything.
pub fn run(scenario: &Scenario) -> Result<Run> {
    match &scenario.model {
        Model::Network(net) => run_network(scenario, net),
        Model::Edge(e) => run_edge(scenario, e),
    }
}

fn write_run(run: &Run, out: &mut Artifacts) -> Result<()> {
    let mut traces = Vec::new();
    for EdgeOutput {
        edge: i,
        solution: sol,
        physical,
    } in &run.fields
    {
        if let Some((h, v)) = physical {
            out.write_field(&format!("edge_{i}_H.csv"), h)?;
            out.write_field(&format!("edge_{i}_V.csv"), v)?;
        }
        out.write_field(&format!("edge_{i}_u.csv"), &sol.u)?;
        out.write_field(&format!("edge_{i}_v.csv"), &sol.v)?;
        let last = sol.u.nx() - 1;
        let u_left: Vec<f64> = sol.u.column(0).to_vec();
        let v_right: Vec<f64> = sol.v.column(last).to_vec();
        if let Some(params) = &run.params {
            let p = &params[i - 1];
            let q = |k: usize, j: usize| flow_rate(sol.u.at(k, j), sol.v.at(k, j), p);
            let nt = sol.u.nt();
            traces.push((format!("edge_{i}_q_left"), (0..nt).map(|k| q(k, 0)).collect()));
            traces.push((format!("edge_{i}_q_right"), (0..nt).map(|k| q(k, last)).collect()));
        }
        traces.push((format!("edge_{i}_u_left"), u_left));
        traces.push((format!("edge_{i}_v_right"), v_right));
    }
    let t = run.fields[0].solution.u.t_nodes().to_vec();
    out.write_columns("boundary_traces.csv", &t, &traces)?;
    out.write_json("report.json", &run.report)
}

/// Runs the scenario and writes its artifacts into `out_dir`. Unless
/// `force`, refuses to run when a smallness condition fails.
pub fn simulate(scenario: &Scenario, out_dir: &Path, force: bool) -> Result<SimulationReport> {
    if !force {
        let v = verify(scenario)?;
        if !v.all_pass {
            return Err(CliError::Conditions(v.failing_edges()));
        }
    }
    let mut out = Artifacts::create(out_dir)?;
    let written = run(scenario).and_then(|r| write_run(&r, &mut out).map(|_| r));
    match written {
        Ok(r) => Ok(r.report),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub cells: usize,
    pub dx: f64,
    pub l1_u: f64,
    pub l1_v: f64,
    pub linf_u: f64,
    pub linf_v: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub horizon: f64,
    pub reference_nx: usize,
    pub reference_nt: usize,
    pub rows: Vec<CompareRow>,
    /// Successive `L¹` ratios (`max` over `u`, `v`) as the cell count grows.
    pub l1_ratios: Vec<f64>,
}

impl CompareReport {
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:>7} {:>10} {:>11} {:>11} {:>11} {:>11}\n",
            "cells", "dx", "L1(u)", "L1(v)", "Linf(u)", "Linf(v)"
        );
        for r in &self.rows {
            s += &format!(
                "{:>7} {:>10.3e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e}\n",
                r.cells, r.dx, r.l1_u, r.l1_v, r.linf_u, r.linf_v
            );
        }
        s
    }
}

struct OracleSetup {
    system: DiagonalSystem,
    closure: OracleClosure,
    u0: Profile,
    v0: Profile,
    length: f64,
    fb: PowerFeedback,
}

/// Distances between the characteristic solution and upwind runs with the
/// given cell counts. Single-edge scenarios only.
pub fn compare(scenario: &Scenario, cells: &[usize]) -> Result<CompareReport> {
    let run = run(scenario)?;
    if run.fields.len() != 1 {
        return Err(CliError::Scenario("compare needs a single-edge scenario".into()));
    }
    let reference = &run.fields[0].solution;
    let setup = match &scenario.model {
        Model::Network(net) => {
            let e = &net.edges[0];
            let p = e.params;
            let c = run.report.c;
            let closure = match net.leaf_kinds.get(&1).copied().unwrap_or_default() {
                LeafKind::Controlled => OracleClosure::TwoControl,
                LeafKind::FlowRate => OracleClosure::OneControl(simple_node_map(&p, c)?),
            };
            OracleSetup {
                system: p.diagonal_system(c)?,
                closure,
                u0: e.u0.clone(),
                v0: e.v0.clone(),
                length: p.length,
                fb: scenario.feedback,
            }
        }
        Model::Edge(e) => OracleSetup {
            system: e.system.clone(),
            closure: match e.left {
                LeftEnd::Feedback => OracleClosure::TwoControl,
                LeftEnd::Reflection => OracleClosure::OneControl(BoundaryMap::reflection()),
            },
            u0: e.u0.clone(),
            v0: e.v0.clone(),
            length: e.length,
            fb: scenario.feedback,
        },
    };
    let horizon = run.report.horizon;
    let max_speed = 1.1 * reference.ledger.m1;
    let mut rows = Vec::new();
    for &n in cells {
        let g = UpwindGrid::with_cfl(n, setup.length, horizon, max_speed, COMPARE_CFL)?;
        let (u, v) = upwind_closed_loop(&setup.system, &setup.u0, &setup.v0, &setup.closure, setup.fb, &g)?;
        let (l1_u, linf_u) = distance_to(&u, &reference.u);
        let (l1_v, linf_v) = distance_to(&v, &reference.v);
        rows.push(CompareRow {
            cells: n,
            dx: g.dx(),
            l1_u,
            l1_v,
            linf_u,
            linf_v,
        });
    }
    let l1_ratios = rows
        .windows(2)
        .map(|w| {
            let a = w[0].l1_u.max(w[0].l1_v);
            let b = w[1].l1_u.max(w[1].l1_v);
            if a == 0.0 {
                0.0
            } else {
                b / a
            }
        })
        .collect();
    Ok(CompareReport {
        horizon,
        reference_nx: reference.u.nx(),
        reference_nt: reference.u.nt(),
        rows,
        l1_ratios,
    })
}
