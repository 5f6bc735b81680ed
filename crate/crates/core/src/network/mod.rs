//! Saint-Venant canals on a tree.
//!
//! Every edge is closed on its right end by a feedback gate on `v`. Leaves
//! are either gated on `u` or held at their equilibrium inflow; at a junction
//! the outgoing edge's `u` is fixed by flow conservation given the incoming
//! traces. Since information only travels towards the root through the
//! junction maps, edges are solved stratum by stratum from the leaves.

mod coupling;
mod simulate;
mod tree;

pub use coupling::{balance_inflow, multiple_node_map, NodeMap, UpstreamTrace};
pub use simulate::{
    balance_junctions, simulate_network, EdgeChecks, EdgeData, EdgeResult, InflowKind, LeafKind, NetworkOptions,
    NetworkScenario, NetworkSolution, NodeResidual,
};
pub use tree::{tree_depth, validate_tree, CanalTree, EdgeSpec, TreeReport};
