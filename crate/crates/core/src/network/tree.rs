//! Tree topology: node numbering, incidence and depth.
//!
//! Nodes are numbered `1..=N` and edges `1..=N-1`. Edge `i` starts at node
//! `i` and flows towards the root `N`; edge `N-1` ends at the root.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    pub length: f64,
}

/// Findings of [`validate_tree`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeReport {
    pub violations: Vec<String>,
    /// Nodes with a single incident edge.
    pub simple_nodes: Vec<usize>,
    /// Nodes with two or more incident edges.
    pub multiple_nodes: Vec<usize>,
    pub depth: Option<usize>,
}

impl TreeReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A validated canal tree.
#[derive(Debug, Clone, PartialEq)]
pub struct CanalTree {
    node_count: usize,
    edges: Vec<EdgeSpec>,
    simple: Vec<usize>,
    multiple: Vec<usize>,
    depth: usize,
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// Checks the numbering conventions and that the graph is a tree, and
/// classifies the nodes.
pub fn validate_tree(node_count: usize, edges: &[EdgeSpec]) -> TreeReport {
    let mut violations = Vec::new();
    let n = node_count;
    if n < 2 {
        violations.push(format!("need at least 2 nodes, got {n}"));
    }
    if edges.len() + 1 != n {
        violations.push(format!(
            "{n} nodes need {} edges, got {}",
            n.saturating_sub(1),
            edges.len()
        ));
    }
    let mut degree = vec![0usize; n + 1];
    let mut parent: Vec<usize> = (0..=n).collect();
    let mut components = n;
    for (k, e) in edges.iter().enumerate() {
        let i = k + 1;
        if e.from != i {
            violations.push(format!("edge {i} must start at node {i}, starts at {}", e.from));
        }
        if e.to == i {
            violations.push(format!("edge {i} ends at its own initial node {i}"));
        }
        if !(e.length > 0.0 && e.length.is_finite()) {
            violations.push(format!("edge {i} has invalid length {}", e.length));
        }
        let ends_ok = (1..=n).contains(&e.from) && (1..=n).contains(&e.to);
        if !ends_ok {
            violations.push(format!("edge {i} references a node outside 1..={n}"));
            continue;
        }
        degree[e.from] += 1;
        degree[e.to] += 1;
        let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
        if a == b {
            if e.from != e.to {
                violations.push(format!("edge {i} closes a cycle"));
            }
        } else {
            parent[a] = b;
            components -= 1;
        }
    }
    if n >= 2 && edges.len() + 1 == n {
        if edges[n - 2].to != n {
            violations.push(format!("edge {} must end at the root {n}", n - 1));
        }
        if components != 1 {
            violations.push("graph is not connected".into());
        }
    }
    let simple: Vec<usize> = (1..=n).filter(|&v| degree[v] == 1).collect();
    let multiple: Vec<usize> = (1..=n).filter(|&v| degree[v] >= 2).collect();
    for v in (1..=n).filter(|&v| degree[v] == 0) {
        violations.push(format!("node {v} has no incident edge"));
    }
    let depth = if violations.is_empty() {
        Some(depth_of(n, edges))
    } else {
        None
    };
    TreeReport {
        violations,
        simple_nodes: simple,
        multiple_nodes: multiple,
        depth,
    }
}

fn depth_of(n: usize, edges: &[EdgeSpec]) -> usize {
    let has_incoming: BTreeSet<usize> = edges.iter().map(|e| e.to).collect();
    (1..n)
        .filter(|v| !has_incoming.contains(v))
        .map(|mut v| {
            let mut hops = 0;
            while v != n {
                v = edges[v - 1].to;
                hops += 1;
            }
            hops
        })
        .max()
        .unwrap_or(0)
}

impl CanalTree {
    pub fn from_edges(node_count: usize, edges: Vec<EdgeSpec>) -> Result<Self> {
        let report = validate_tree(node_count, &edges);
        if !report.is_valid() {
            return Err(Error::InvalidTree(report.violations));
        }
        Ok(Self {
            node_count,
            edges,
            simple: report.simple_nodes,
            multiple: report.multiple_nodes,
            depth: report.depth.unwrap_or(0),
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn root(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge `i`, 1-based.
    pub fn edge(&self, i: usize) -> &EdgeSpec {
        &self.edges[i - 1]
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    /// `ε_{i,n}`: 1 if edge `i` ends at node `n`, 0 otherwise.
    pub fn incidence(&self, i: usize, n: usize) -> u8 {
        u8::from(self.edge(i).to == n)
    }

    /// Edges ending at node `n`.
    pub fn incoming(&self, n: usize) -> Vec<usize> {
        (1..=self.edges.len()).filter(|&i| self.edge(i).to == n).collect()
    }

    pub fn simple_nodes(&self) -> &[usize] {
        &self.simple
    }

    pub fn multiple_nodes(&self) -> &[usize] {
        &self.multiple
    }

    pub fn is_multiple(&self, n: usize) -> bool {
        self.multiple.binary_search(&n).is_ok()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn max_length(&self) -> f64 {
        self.edges.iter().fold(0.0, |m, e| m.max(e.length))
    }

    /// Edges grouped into strata: an edge's stratum is one more than the
    /// largest stratum among the edges feeding it. Strata are solved in
    /// order; edges within one stratum are independent.
    pub fn strata(&self) -> Vec<Vec<usize>> {
        let m = self.edges.len();
        let mut level = vec![0usize; m + 1];
        // edges feeding node i have indices unrelated to i, so iterate to a fixpoint
        let mut changed = true;
        while changed {
            changed = false;
            for i in 1..=m {
                let l = self.incoming(i).iter().map(|&j| level[j] + 1).max().unwrap_or(0);
                if l != level[i] {
                    level[i] = l;
                    changed = true;
                }
            }
        }
        let top = level.iter().copied().max().unwrap_or(0);
        (0..=top)
            .map(|l| (1..=m).filter(|&i| level[i] == l).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// The subtree draining into edge `i` (inclusive), renumbered so that it
    /// is again a canal tree; returns it with the map new edge → old edge.
    pub fn subtree(&self, i: usize) -> Result<(CanalTree, Vec<usize>)> {
        let mut members = vec![i];
        let mut k = 0;
        while k < members.len() {
            let e = members[k];
            members.extend(self.incoming(e));
            k += 1;
        }
        // sort so that the renumbering respects flow order: old edge order
        // with `i` last
        members.sort_unstable();
        members.retain(|&e| e != i);
        members.push(i);
        let new_of = |old_node: usize| members.iter().position(|&e| e == old_node).map(|p| p + 1);
        let n = members.len() + 1;
        let edges = members
            .iter()
            .enumerate()
            .map(|(p, &old)| {
                let e = self.edge(old);
                EdgeSpec {
                    from: p + 1,
                    to: if old == i { n } else { new_of(e.to).unwrap_or(n) },
                    length: e.length,
                }
            })
            .collect();
        Ok((CanalTree::from_edges(n, edges)?, members))
    }
}

/// Depth of a valid tree.
pub fn tree_depth(tree: &CanalTree) -> usize {
    tree.depth()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(from: usize, to: usize) -> EdgeSpec {
        EdgeSpec { from, to, length: 1.0 }
    }

    #[test]
    fn test_single_edge() {
        let r = validate_tree(2, &[e(1, 2)]);
        assert!(r.is_valid());
        assert_eq!(r.simple_nodes, vec![1, 2]);
        assert_eq!(r.depth, Some(1));
    }

    #[test]
    fn test_self_loop_rejected() {
        let r = validate_tree(2, &[e(1, 1)]);
        assert!(!r.is_valid());
    }

    #[test]
    fn test_star_depth_two() {
        let t = CanalTree::from_edges(5, vec![e(1, 4), e(2, 4), e(3, 4), e(4, 5)]).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.multiple_nodes(), &[4]);
        assert_eq!(t.strata(), vec![vec![1, 2, 3], vec![4]]);
        assert_eq!(t.incidence(1, 4), 1);
        assert_eq!(t.incidence(4, 4), 0);
    }

    #[test]
    fn test_subtree_renumbering() {
        let bad = CanalTree::from_edges(4, vec![e(1, 3), e(2, 3), e(3, 2)]).unwrap_err();
        assert!(matches!(bad, Error::InvalidTree(_)));
        let t = CanalTree::from_edges(6, vec![e(1, 3), e(2, 3), e(3, 5), e(4, 5), e(5, 6)]).unwrap();
        let (sub, map) = t.subtree(3).unwrap();
        assert_eq!(map, vec![1, 2, 3]);
        assert_eq!(sub.node_count(), 4);
        assert_eq!(sub.edge(3).to, 4);
    }
}
