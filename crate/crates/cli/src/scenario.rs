//! Scenario files: JSON schema and resolution into solver inputs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use hypstab_core::feedback::PowerFeedback;
use hypstab_core::network::{balance_junctions, CanalTree, EdgeData, EdgeSpec, LeafKind, NetworkScenario};
use hypstab_core::quasilinear::DiagonalSystem;
use hypstab_core::saintvenant::CanalParams;
use hypstab_core::saintvenant::DEFAULT_GRAVITY;
use hypstab_core::Profile;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub system: SystemSpec,
    pub tree: TreeSpec,
    pub initial: InitialSpec,
    pub feedback: FeedbackSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub run: RunSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// One canal per edge, in edge order.
    SaintVenant {
        #[serde(default = "default_gravity")]
        g: f64,
        canals: Vec<CanalSpec>,
    },
    /// `λ = l0 + l1 u + l2 v`, `μ = m0 + m1 u + m2 v`.
    Affine { lambda: [f64; 3], mu: [f64; 3], c: f64 },
    /// `λ[i][j]`, `μ[i][j]` at `(u_nodes[i], v_nodes[j])`, bilinear in between
    /// and held constant outside.
    Tabulated {
        u_nodes: Vec<f64>,
        v_nodes: Vec<f64>,
        lambda: Vec<Vec<f64>>,
        mu: Vec<Vec<f64>>,
        c: f64,
    },
}

fn default_gravity() -> f64 {
    DEFAULT_GRAVITY
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanalSpec {
    pub h_star: f64,
    pub v_star: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub nodes: usize,
    pub edges: Vec<EdgeSpec>,
    /// Kinds of inflow nodes, keyed by node number; unlisted nodes are
    /// controlled.
    #[serde(default)]
    pub node_kinds: BTreeMap<usize, NodeKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// Feedback on the left end.
    Controlled,
    /// Saint-Venant leaf held at the equilibrium flow rate.
    FlowRate,
    /// `u(t, 0) = v(t, 0)` on a single-edge diagonal system.
    Reflection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub edges: Vec<EdgeInitial>,
    /// Adjust inflow velocities so initial flows balance at junctions and
    /// match `Q*` at flow-rate leaves.
    #[serde(default)]
    pub balance_junctions: bool,
}

/// Either physical `depth`/`velocity` profiles (Saint-Venant) or Riemann
/// `u`/`v` profiles.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeInitial {
    pub depth: Option<ProfileSpec>,
    pub velocity: Option<ProfileSpec>,
    pub u: Option<ProfileSpec>,
    pub v: Option<ProfileSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    /// `offset + amplitude · sin(π·frequency·ξ/l + phase)` with `ξ` clamped
    /// to `[flatten·l, (1 - flatten)·l]`.
    Sine {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        flatten: f64,
    },
    /// Values at uniform nodes of `[0, l]`, linear in between.
    Samples {
        values: Vec<f64>,
    },
    /// One row of a field CSV written by `simulate` (row 0 is `t = 0`);
    /// `path` is relative to the scenario file.
    Csv {
        path: PathBuf,
        #[serde(default)]
        row: usize,
    },
    /// A sine series with coefficients drawn from the run seed, scaled so
    /// that the perturbation never exceeds `amplitude`.
    RandomModes {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        #[serde(default = "four")]
        modes: usize,
        #[serde(default)]
        flatten: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn four() -> usize {
    4
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackSpec {
    pub k: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    /// Time samples; derived from `cfl` when absent.
    pub nt: Option<usize>,
    /// `max speed · Δt / Δx` used to derive `nt`.
    pub cfl: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub horizon: Option<f64>,
    /// Ledger bounds; measured from the data when absent.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub extinction_tol: Option<f64>,
    pub coupling_tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid_nx: Option<usize>,
    pub tol: Option<f64>,
    pub horizon: Option<f64>,
}

impl ScenarioFile {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(nx) = o.grid_nx {
            self.grid.nx = nx;
        }
        if let Some(tol) = o.tol {
            self.run.tol = Some(tol);
        }
        if let Some(h) = o.horizon {
            self.run.horizon = Some(h);
        }
    }
}

/// How the left end of a single diagonal-system edge is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftEnd {
    Feedback,
    Reflection,
}

/// A single edge with a user-supplied diagonal system.
#[derive(Debug, Clone)]
pub struct EdgeModel {
    pub system: DiagonalSystem,
    pub u0: Profile,
    pub v0: Profile,
    pub length: f64,
    pub left: LeftEnd,
}

#[derive(Debug, Clone)]
pub enum Model {
    Network(NetworkScenario),
    Edge(EdgeModel),
}

/// A parsed scenario with every profile and parameter resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub model: Model,
    pub feedback: PowerFeedback,
}

impl Scenario {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut file = ScenarioFile::from_json(&text, path)?;
        file.apply(overrides);
        let base = path.parent().unwrap_or(Path::new("."));
        Self::resolve(file, base)
    }

    /// Resolves `file`; relative CSV paths are taken from `base`.
    pub fn resolve(file: ScenarioFile, base: &Path) -> Result<Self> {
        let feedback = PowerFeedback::new(file.feedback.k, file.feedback.gamma)?;
        let tree = CanalTree::from_edges(file.tree.nodes, file.tree.edges.clone())?;
        if file.initial.edges.len() != tree.edge_count() {
            return Err(CliError::Scenario(format!(
                "{} edges in the tree but {} initial entries",
                tree.edge_count(),
                file.initial.edges.len()
            )));
        }
        if file.grid.nx < 2 {
            return Err(CliError::Scenario("grid.nx must be at least 2".into()));
        }
        if file.grid.nt.is_none() && file.grid.cfl.is_none() {
            return Err(CliError::Scenario("grid needs nt or cfl".into()));
        }
        let ctx = ProfileContext {
            base,
            seed: file.run.seed,
        };
        let model = match &file.system {
            SystemSpec::SaintVenant { g, canals } => Model::Network(network_model(&file, tree, *g, canals, &ctx)?),
            SystemSpec::Affine { lambda, mu, c } => Model::Edge(edge_model(
                &file,
                &tree,
                DiagonalSystem::affine(*lambda, *mu, *c)?,
                &ctx,
            )?),
            SystemSpec::Tabulated {
                u_nodes,
                v_nodes,
                lambda,
                mu,
                c,
            } => {
                let sys = tabulated_system(u_nodes, v_nodes, lambda, mu, *c)?;
                Model::Edge(edge_model(&file, &tree, sys, &ctx)?)
            }
        };
        Ok(Self { file, model, feedback })
    }

    /// Number of time samples for a run up to `horizon` with speeds up to
    /// `max_speed` on edges of length up to `length`.
    pub fn time_samples(&self, horizon: f64, max_speed: f64, length: f64) -> usize {
        match (self.file.grid.nt, self.file.grid.cfl) {
            (Some(nt), _) => nt,
            (None, Some(cfl)) => {
                let dx = length / (self.file.grid.nx - 1) as f64;
                (horizon * max_speed / (cfl * dx)).ceil() as usize + 1
            }
            (None, None) => unreachable!("checked on resolve"),
        }
    }
}

struct ProfileContext<'a> {
    base: &'a Path,
    seed: u64,
}

impl ProfileContext<'_> {
    fn build(&self, spec: &ProfileSpec, length: f64, stream: u64) -> Result<Profile> {
        Ok(match spec {
            ProfileSpec::Constant { value } => Profile::constant(length, *value),
            ProfileSpec::Sine {
                offset,
                amplitude,
                frequency,
                phase,
                flatten,
            } => Profile::flattened_sine(length, *offset, *amplitude, *frequency, *phase, *flatten),
            ProfileSpec::Samples { values } => {
                if values.len() < 2 {
                    return Err(CliError::Scenario("sampled profiles need at least two values".into()));
                }
                Profile::samples(length, values.clone())
            }
            ProfileSpec::Csv { path, row } => {
                let full = self.base.join(path);
                let values = crate::output::read_field_row(&full, *row)?;
                if values.len() < 2 {
                    return Err(CliError::Scenario(format!(
                        "{}: row {row} has fewer than two values",
                        full.display()
                    )));
                }
                Profile::samples(length, values)
            }
            ProfileSpec::RandomModes {
                offset,
                amplitude,
                modes,
                flatten,
            } => {
                let mut rng = StdRng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream));
                let raw: Vec<f64> = (1..=*modes).map(|k| rng.random_range(-1.0..1.0) / k as f64).collect();
                let norm = raw.iter().map(|a| a.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
                let coeffs: Vec<f64> = raw.iter().map(|a| amplitude * a / norm).collect();
                let (offset, lo, hi) = (
                    *offset,
                    flatten.clamp(0.0, 0.5) * length,
                    (1.0 - flatten.clamp(0.0, 0.5)) * length,
                );
                Profile::new(length, move |x| {
                    let xi = x.clamp(lo, hi);
                    offset
                        + coeffs
                            .iter()
                            .enumerate()
                            .map(|(k, a)| a * (PI * (k + 1) as f64 * xi / length).sin())
                            .sum::<f64>()
                })
            }
        })
    }
}

fn required<'a>(spec: &'a Option<ProfileSpec>, edge: usize, name: &str) -> Result<&'a ProfileSpec> {
    spec.as_ref()
        .ok_or_else(|| CliError::Scenario(format!("edge {edge}: missing initial `{name}` profile")))
}

fn network_model(
    file: &ScenarioFile,
    tree: CanalTree,
    g: f64,
    canals: &[CanalSpec],
    ctx: &ProfileContext<'_>,
) -> Result<NetworkScenario> {
    if canals.len() != tree.edge_count() {
        return Err(CliError::Scenario(format!(
            "{} canals for {} edges",
            canals.len(),
            tree.edge_count()
        )));
    }
    let params = canals
        .iter()
        .zip(tree.edges())
        .map(|(c, e)| CanalParams::new(c.h_star, c.v_star, g, e.length))
        .collect::<hypstab_core::Result<Vec<_>>>()?;

    let mut leaf_kinds = BTreeMap::new();
    for (&node, &kind) in &file.tree.node_kinds {
        let is_leaf = tree.simple_nodes().contains(&node) && node != tree.root();
        match kind {
            NodeKind::Controlled | NodeKind::FlowRate if is_leaf => {
                let k = if kind == NodeKind::FlowRate {
                    LeafKind::FlowRate
                } else {
                    LeafKind::Controlled
                };
                leaf_kinds.insert(node, k);
            }
            _ => {
                return Err(CliError::Scenario(format!(
                    "node {node}: kind {kind:?} is only allowed on Saint-Venant leaves as controlled or flow_rate"
                )))
            }
        }
    }

    let physical = file
        .initial
        .edges
        .iter()
        .all(|e| e.depth.is_some() || e.velocity.is_some());
    let edges = if physical {
        let mut init = Vec::new();
        for (k, (e, p)) in file.initial.edges.iter().zip(&params).enumerate() {
            let stream = 2 * k as u64;
            let h0 = ctx.build(required(&e.depth, k + 1, "depth")?, p.length, stream)?;
            let v0 = ctx.build(required(&e.velocity, k + 1, "velocity")?, p.length, stream + 1)?;
            init.push((h0, v0));
        }
        if file.initial.balance_junctions {
            balance_junctions(&tree, &params, &mut init, &leaf_kinds);
        }
        init.iter()
            .zip(&params)
            .map(|((h, v), p)| EdgeData::from_physical(*p, h, v))
            .collect::<hypstab_core::Result<Vec<_>>>()?
    } else {
        if file.initial.balance_junctions {
            return Err(CliError::Scenario(
                "balance_junctions needs depth/velocity profiles".into(),
            ));
        }
        let mut out = Vec::new();
        for (k, (e, p)) in file.initial.edges.iter().zip(&params).enumerate() {
            let stream = 2 * k as u64;
            out.push(EdgeData {
                params: *p,
                u0: ctx.build(required(&e.u, k + 1, "u")?, p.length, stream)?,
                v0: ctx.build(required(&e.v, k + 1, "v")?, p.length, stream + 1)?,
            });
        }
        out
    };
    Ok(NetworkScenario {
        tree,
        edges,
        leaf_kinds,
        feedback: PowerFeedback::new(file.feedback.k, file.feedback.gamma)?,
        nx: file.grid.nx,
        // replaced once the horizon is known
        nt: file.grid.nt.unwrap_or(2),
        horizon: file.run.horizon,
    })
}

fn edge_model(
    file: &ScenarioFile,
    tree: &CanalTree,
    system: DiagonalSystem,
    ctx: &ProfileContext<'_>,
) -> Result<EdgeModel> {
    if tree.edge_count() != 1 {
        return Err(CliError::Scenario(
            "affine and tabulated systems describe a single edge; use saint_venant for networks".into(),
        ));
    }
    let length = tree.edge(1).length;
    let left = match file.tree.node_kinds.get(&1).copied().unwrap_or(NodeKind::Controlled) {
        NodeKind::Controlled => LeftEnd::Feedback,
        NodeKind::Reflection => LeftEnd::Reflection,
        NodeKind::FlowRate => return Err(CliError::Scenario("flow_rate leaves need a saint_venant system".into())),
    };
    if let Some((&n, _)) = file.tree.node_kinds.iter().find(|(&n, _)| n != 1) {
        return Err(CliError::Scenario(format!(
            "node {n}: only the inflow node 1 takes a kind"
        )));
    }
    let e = &file.initial.edges[0];
    if file.initial.balance_junctions || e.depth.is_some() || e.velocity.is_some() {
        return Err(CliError::Scenario(
            "diagonal systems take Riemann `u`/`v` profiles".into(),
        ));
    }
    Ok(EdgeModel {
        system,
        u0: ctx.build(required(&e.u, 1, "u")?, length, 0)?,
        v0: ctx.build(required(&e.v, 1, "v")?, length, 1)?,
        length,
        left,
    })
}

/// Bilinear interpolation on a tensor grid, constant outside.
fn bilinear(us: &[f64], vs: &[f64], table: &[Vec<f64>], u: f64, v: f64) -> f64 {
    let locate = |nodes: &[f64], x: f64| -> (usize, f64) {
        if x <= nodes[0] {
            return (0, 0.0);
        }
        if x >= nodes[nodes.len() - 1] {
            return (nodes.len() - 2, 1.0);
        }
        let i = nodes.partition_point(|&n| n <= x) - 1;
        (i, (x - nodes[i]) / (nodes[i + 1] - nodes[i]))
    };
    let (i, a) = locate(us, u);
    let (j, b) = locate(vs, v);
    let lo = table[i][j] * (1.0 - b) + table[i][j + 1] * b;
    let hi = table[i + 1][j] * (1.0 - b) + table[i + 1][j + 1] * b;
    lo * (1.0 - a) + hi * a
}

fn tabulated_system(us: &[f64], vs: &[f64], lambda: &[Vec<f64>], mu: &[Vec<f64>], c: f64) -> Result<DiagonalSystem> {
    let increasing = |n: &[f64]| n.len() >= 2 && n.windows(2).all(|w| w[1] > w[0]);
    if !increasing(us) || !increasing(vs) {
        return Err(CliError::Scenario(
            "tabulated nodes must be strictly increasing, at least two each".into(),
        ));
    }
    for (name, t) in [("lambda", lambda), ("mu", mu)] {
        if t.len() != us.len() || t.iter().any(|r| r.len() != vs.len()) {
            return Err(CliError::Scenario(format!(
                "tabulated {name} must be {}×{}",
                us.len(),
                vs.len()
            )));
        }
    }
    let (u1, v1, l1) = (us.to_vec(), vs.to_vec(), lambda.to_vec());
    let (u2, v2, m2) = (us.to_vec(), vs.to_vec(), mu.to_vec());
    Ok(DiagonalSystem::new(
        move |u, v| bilinear(&u1, &v1, &l1, u, v),
        move |u, v| bilinear(&u2, &v2, &m2, u, v),
        c,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = r#"{
        "system": {"kind": "affine", "lambda": [1, 0.75, 0.25], "mu": [-1, 0.25, 0.75], "c": 1},
        "tree": {"nodes": 2, "edges": [{"from": 1, "to": 2, "length": 1}]},
        "initial": {"edges": [{"u": {"kind": "sine", "amplitude": 0.02, "flatten": 0.1},
                               "v": {"kind": "constant", "value": 0}}]},
        "feedback": {"k": 1, "gamma": 0.5},
        "grid": {"nx": 21, "nt": 41}
    }"#;

    #[test]
    fn test_parse_and_resolve() {
        let file = ScenarioFile::from_json(SINGLE, Path::new("s.json")).unwrap();
        let s = Scenario::resolve(file, Path::new(".")).unwrap();
        match s.model {
            Model::Edge(e) => {
                assert_eq!(e.left, LeftEnd::Feedback);
                assert!((e.u0.eval(0.5) - 0.02).abs() < 1e-15);
                assert_eq!(e.system.lambda(0.0, 0.0), 1.0);
            }
            Model::Network(_) => panic!("expected a single edge"),
        }
    }

    #[test]
    fn test_parse_error_has_position() {
        let err = ScenarioFile::from_json("{\n  \"system\": 3\n}", Path::new("bad.json")).unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn test_bilinear_table() {
        let us = [-1.0, 1.0];
        let vs = [-1.0, 1.0];
        let t = vec![vec![0.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(bilinear(&us, &vs, &t, 0.0, 0.0), 2.0);
        assert_eq!(bilinear(&us, &vs, &t, 5.0, 5.0), 4.0);
        assert_eq!(bilinear(&us, &vs, &t, -1.0, 1.0), 2.0);
    }

    #[test]
    fn test_random_modes_are_seeded() {
        let ctx = |seed| ProfileContext {
            base: Path::new("."),
            seed,
        };
        let spec = ProfileSpec::RandomModes {
            offset: 1.0,
            amplitude: 0.01,
            modes: 5,
            flatten: 0.0,
        };
        let a = ctx(7).build(&spec, 1.0, 0).unwrap();
        let b = ctx(7).build(&spec, 1.0, 0).unwrap();
        let c = ctx(8).build(&spec, 1.0, 0).unwrap();
        assert_eq!(a.eval(0.3), b.eval(0.3));
        assert_ne!(a.eval(0.3), c.eval(0.3));
        assert!((a.sup() - 1.0).abs() <= 0.01 + 1e-12);
    }
}
