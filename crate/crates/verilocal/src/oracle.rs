//! Brute-force verifier for small instances.
//!
//! Every corner of the optimal embedding set fits some spanning tree of
//! measurements exactly, so screening all spanning-tree embeddings finds
//! the exact optimum and the full corner set without touching any simplex
//! machinery. Deliberately shares no evaluation code with the LP path.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::graph::MeasurementGraph;
use crate::instance::ProblemInstance;
use crate::rational::Rat;

/// Node cap beyond which the oracle refuses to run.
pub const DEFAULT_NODE_CAP: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {nodes} nodes, oracle cap is {cap}")]
    TooLarge { nodes: usize, cap: usize },
}

/// An embedding that zeroes the residuals of one spanning tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEmbedding {
    /// Edge indices of the tree.
    pub tree_edges: Vec<usize>,
    /// Node coordinates propagated from the gauge node.
    pub x: Vec<Rat>,
}

/// Exact minimum and all minimizing embeddings among tree embeddings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub cost: Rat,
    /// Distinct optimal embeddings, sorted.
    pub embeddings: Vec<Vec<Rat>>,
}

/// Enumerates every spanning tree as a list of edge indices, by the usual
/// include/contract, exclude/check recursion.
pub fn spanning_trees(graph: &MeasurementGraph) -> Vec<Vec<usize>> {
    let n = graph.num_nodes();
    let edges: Vec<(usize, usize, usize)> = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| (e.i - 1, e.j - 1, k))
        .collect();
    let mut chosen = Vec::new();
    let mut out = Vec::new();
    let dsu: Vec<usize> = (0..n).collect();
    recurse(&edges, dsu, n, &mut chosen, &mut out);
    out
}

fn find(parent: &mut Vec<usize>, mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

fn recurse(
    edges: &[(usize, usize, usize)],
    parent: Vec<usize>,
    components: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if components == 1 {
        out.push(chosen.clone());
        return;
    }
    let Some(&(u, v, id)) = edges.first() else {
        return;
    };
    let rest = &edges[1..];

    // Include the edge unless it would close a cycle.
    let mut with_edge = parent.clone();
    let (a, b) = (find(&mut with_edge, u), find(&mut with_edge, v));
    if a != b {
        with_edge[a] = b;
        chosen.push(id);
        recurse(rest, with_edge, components - 1, chosen, out);
        chosen.pop();
    }

    // Exclude the edge if the remainder can still connect everything.
    let mut probe = parent.clone();
    let mut reachable = components;
    for &(x, y, _) in rest {
        let (a, b) = (find(&mut probe, x), find(&mut probe, y));
        if a != b {
            probe[a] = b;
            reachable -= 1;
        }
    }
    if reachable == 1 {
        recurse(rest, parent, components, chosen, out);
    }
}

/// Builds the embedding that makes every tree edge fit exactly, starting
/// from zero at the gauge node.
pub fn tree_embedding(inst: &ProblemInstance, tree: &[usize]) -> TreeEmbedding {
    debug_assert_eq!(inst.dim(), 1);
    let graph = inst.graph();
    let n = graph.num_nodes();
    let mut adjacency: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); n];
    for &k in tree {
        let e = graph.edge(k);
        adjacency[e.i - 1].push((e.j - 1, k, true));
        adjacency[e.j - 1].push((e.i - 1, k, false));
    }
    let mut x = vec![Rat::zero(); n];
    let mut placed = vec![false; n];
    placed[0] = true;
    let mut queue = vec![0usize];
    while let Some(node) = queue.pop() {
        for &(next, k, forward) in &adjacency[node] {
            if placed[next] {
                continue;
            }
            let eps = inst.epsilon_1d(k);
            x[next] = if forward {
                &x[node] + eps
            } else {
                &x[node] - eps
            };
            placed[next] = true;
            queue.push(next);
        }
    }
    debug_assert!(placed.iter().all(|&p| p));
    TreeEmbedding {
        tree_edges: tree.to_vec(),
        x,
    }
}

fn cost_of(inst: &ProblemInstance, x: &[Rat]) -> Rat {
    let mut total = Rat::zero();
    for (e, edge) in inst.graph().edges().iter().enumerate() {
        total += (&x[edge.j - 1] - &x[edge.i - 1] - inst.epsilon_1d(e)).abs();
    }
    total
}

/// Screens every spanning-tree embedding and returns the exact minimum with
/// all minimizers, at the default node cap.
pub fn oracle_solve(inst: &ProblemInstance) -> Result<OracleSolution, OracleError> {
    oracle_solve_capped(inst, DEFAULT_NODE_CAP)
}

pub fn oracle_solve_capped(
    inst: &ProblemInstance,
    cap: usize,
) -> Result<OracleSolution, OracleError> {
    debug_assert_eq!(inst.dim(), 1);
    let nodes = inst.graph().num_nodes();
    if nodes > cap {
        return Err(OracleError::TooLarge { nodes, cap });
    }
    if inst.graph().num_edges() == 0 {
        return Ok(OracleSolution {
            cost: Rat::zero(),
            embeddings: vec![vec![Rat::zero(); nodes]],
        });
    }

    let mut best: Option<Rat> = None;
    let mut minimizers: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for tree in spanning_trees(inst.graph()) {
        let embedding = tree_embedding(inst, &tree);
        let cost = cost_of(inst, &embedding.x);
        match &best {
            Some(incumbent) if cost > *incumbent => {}
            Some(incumbent) if cost == *incumbent => {
                minimizers.insert(embedding.x);
            }
            _ => {
                best = Some(cost);
                minimizers.clear();
                minimizers.insert(embedding.x);
            }
        }
    }
    Ok(OracleSolution {
        cost: best.expect("connected graph has a spanning tree"),
        embeddings: minimizers.into_iter().collect(),
    })
}

/// Independent verifiability check: the origin is optimal exactly when the
/// summed outlier magnitudes already equal the best achievable cost.
pub fn oracle_ver(inst: &ProblemInstance) -> Result<bool, OracleError> {
    let solution = oracle_solve(inst)?;
    Ok(inst.origin_cost() == solution.cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn instance(graph: MeasurementGraph, eps: &[Rat]) -> ProblemInstance {
        let rows = eps.iter().map(|v| vec![v.clone()]).collect();
        ProblemInstance::new(graph, rows).unwrap()
    }

    #[test]
    fn triangle_has_three_spanning_trees() {
        let g = MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let mut trees = spanning_trees(&g);
        trees.sort();
        assert_eq!(trees, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn complete_graph_tree_counts_follow_cayley() {
        for n in 2..=5 {
            let g = MeasurementGraph::complete(n);
            let expected = (n as u64).pow(n as u32 - 2);
            assert_eq!(spanning_trees(&g).len() as u64, expected);
        }
    }

    #[test]
    fn tree_embedding_zeroes_tree_residuals() {
        let g = MeasurementGraph::new(3, [(1, 2), (3, 2), (1, 3)]).unwrap();
        let inst = instance(g, &[int(1), int(2), rat(1, 2)]);
        let emb = tree_embedding(&inst, &[0, 1]);
        // Edge (1,2) forward: x2 = 1. Edge (3,2) reversed: x3 = x2 - 2.
        assert_eq!(emb.x, vec![int(0), int(1), int(-1)]);
    }

    #[test]
    fn clean_instance_has_unique_zero_optimum() {
        let g = MeasurementGraph::complete(4);
        let inst = ProblemInstance::clean(g, 1);
        let sol = oracle_solve(&inst).unwrap();
        assert!(sol.cost.is_zero());
        assert_eq!(sol.embeddings, vec![vec![int(0); 4]]);
        assert!(oracle_ver(&inst).unwrap());
    }

    #[test]
    fn single_outlier_edge_fits_exactly() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let inst = instance(g, &[int(1)]);
        let sol = oracle_solve(&inst).unwrap();
        assert!(sol.cost.is_zero());
        assert_eq!(sol.embeddings, vec![vec![int(0), int(1)]]);
        assert!(!oracle_ver(&inst).unwrap());
    }

    #[test]
    fn triangle_outlier_screening_matches_hand_enumeration() {
        let g = MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let inst = instance(g, &[int(0), int(0), int(1)]);
        let sol = oracle_solve(&inst).unwrap();
        assert_eq!(sol.cost, int(1));
        assert_eq!(
            sol.embeddings,
            vec![
                vec![int(0), int(0), int(0)],
                vec![int(0), int(0), int(1)],
                vec![int(0), int(1), int(1)],
            ]
        );
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let g = MeasurementGraph::complete(9);
        let inst = ProblemInstance::clean(g, 1);
        assert_eq!(
            oracle_solve(&inst).unwrap_err(),
            OracleError::TooLarge { nodes: 9, cap: 8 }
        );
    }
}
