//! Enumeration and classification of the optimal-solution polyhedron.
//!
//! Starting from the basis the dual simplex terminates in, a depth-first
//! search pivots nonbasic zero-reduced-cost columns through their
//! minimum-ratio rows. Such pivots keep the basis optimal and feasible, and
//! any Bland-rule path lies inside the searched edge set, so every optimal
//! basis that represents an extreme point is reached. The visited set is
//! kept at basis level because degenerate vertices own many bases and some
//! corners are only reachable through them.
//!
//! Bases are then collapsed to geometric corners. A basic solution whose
//! exactly-fit edges fail to span the graph sits on a kink of the embedding
//! polytope rather than at one of its corners (the split coordinate pair of
//! some node is pinned at zero there), so those solutions are dropped. What
//! remains is exactly the corner set of the embedding polytope, which is
//! what the brute-force spanning-tree screen produces as well.

use std::collections::{BTreeMap, HashSet};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::graph::MeasurementGraph;
use crate::instance::ProblemInstance;
use crate::rational::Rat;
use crate::tableau::{SolveError, Tableau};

/// Verdict for one instance (or one dimension of one).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// The origin is the only optimum.
    UniquelyVerifiable,
    /// The origin is optimal but not unique.
    Verifiable,
    /// The origin is not optimal.
    NonVerifiable,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::UniquelyVerifiable => "UniquelyVerifiable",
            Classification::Verifiable => "Verifiable",
            Classification::NonVerifiable => "NonVerifiable",
        }
    }

    /// The verifiability indicator: 1 unless non-verifiable.
    pub fn is_verifiable(self) -> bool {
        !matches!(self, Classification::NonVerifiable)
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One corner of the optimal set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corner {
    /// Node coordinates; entry 0 is the gauge node.
    pub x: Vec<Rat>,
    /// Per-edge costs at this corner.
    pub edge_costs: Vec<Rat>,
    /// Sorted basis that first produced this corner.
    pub basis_key: Vec<usize>,
}

/// Every corner of the optimal set of a 1-D instance, with its verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CornerSet {
    pub corners: Vec<Corner>,
    pub classification: Classification,
    pub optimal_cost: Rat,
}

impl CornerSet {
    pub fn num_nodes(&self) -> usize {
        self.corners[0].x.len()
    }

    pub fn num_edges(&self) -> usize {
        self.corners[0].edge_costs.len()
    }

    /// The corner at the origin, when present.
    pub fn origin_corner(&self) -> Option<&Corner> {
        self.corners.iter().find(|c| c.x.iter().all(Rat::is_zero))
    }
}

/// Explores every basis reachable along the optimal face and returns the
/// distinct corners of the optimal embedding set, classified.
pub fn enumerate_corners(optimal: &Tableau, inst: &ProblemInstance) -> CornerSet {
    debug_assert!(optimal.is_primal_feasible() && optimal.is_dual_feasible());
    debug_assert_eq!(inst.dim(), 1);

    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut stack = vec![optimal.clone()];
    visited.insert(optimal.basis_key());

    // Dedup by the full variable assignment; the split coordinates are
    // complementary at a basic solution, so this never merges distinct
    // embeddings.
    let mut seen_points: BTreeMap<Vec<Rat>, Corner> = BTreeMap::new();

    while let Some(tableau) = stack.pop() {
        let solution = tableau.primal_solution();
        let mut point = solution.x.clone();
        point.extend(solution.z.iter().cloned());
        point.extend(solution.s_plus.iter().cloned());
        point.extend(solution.s_minus.iter().cloned());
        seen_points.entry(point).or_insert_with(|| Corner {
            x: solution.x,
            edge_costs: solution.z,
            basis_key: tableau.basis_key(),
        });

        let moves: Vec<(usize, usize)> = tableau
            .zero_cost_nonbasic_cols()
            .flat_map(|col| {
                tableau
                    .min_ratio_rows(col)
                    .into_iter()
                    .map(move |row| (row, col))
            })
            .collect();
        for (row, col) in moves {
            let mut key = tableau.basis_key();
            let leaving = tableau.basis()[row];
            let slot = key.binary_search(&leaving).expect("leaving is basic");
            key[slot] = col;
            key.sort_unstable();
            if visited.insert(key) {
                let mut next = tableau.clone();
                next.pivot(row, col);
                stack.push(next);
            }
        }
    }

    let mut corners: Vec<Corner> = seen_points
        .into_values()
        .filter(|corner| spans_all_nodes(inst.graph(), &corner.edge_costs))
        .collect();
    corners.sort_by(|a, b| a.x.cmp(&b.x));

    let optimal_cost = optimal.objective().clone();
    let origin_cost = inst.origin_cost();
    debug_assert!(origin_cost >= optimal_cost);
    let origin_is_optimal = origin_cost == optimal_cost;
    let classification = if !origin_is_optimal {
        Classification::NonVerifiable
    } else if corners.len() == 1 && corners[0].x.iter().all(Rat::is_zero) {
        Classification::UniquelyVerifiable
    } else {
        Classification::Verifiable
    };

    CornerSet {
        corners,
        classification,
        optimal_cost,
    }
}

/// True when the exactly-fit edges (zero cost) connect all nodes.
fn spans_all_nodes(graph: &MeasurementGraph, edge_costs: &[Rat]) -> bool {
    let mut parent: Vec<usize> = (0..graph.num_nodes()).collect();
    fn find(parent: &mut Vec<usize>, mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let mut components = graph.num_nodes();
    for (e, edge) in graph.edges().iter().enumerate() {
        if !edge_costs[e].is_zero() {
            continue;
        }
        let (a, b) = (find(&mut parent, edge.i - 1), find(&mut parent, edge.j - 1));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components == 1
}

/// The verdict of an already-built corner set.
pub fn classify(corner_set: &CornerSet) -> Classification {
    corner_set.classification
}

/// Decides whether the optimal embedding is unique without enumerating
/// corners, by maximizing and minimizing each coordinate over the optimal
/// face. Uniqueness holds exactly when every extreme value is zero.
pub fn optimal_embedding_is_unique(optimal: &Tableau) -> Result<bool, SolveError> {
    let layout = *optimal.layout();
    for node in 2..=layout.num_nodes {
        let plus = layout.x_plus_col(node).expect("non-gauge node");
        let minus = layout.x_minus_col(node).expect("non-gauge node");
        for direction in [1i64, -1] {
            let mut weights = vec![Rat::zero(); layout.num_cols()];
            weights[plus] = crate::rational::int(direction);
            weights[minus] = crate::rational::int(-direction);
            let extreme = optimal.clone().minimize_on_optimal_face(&weights)?;
            if !extreme.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Fast three-way verdict from a solved tableau: cost comparison first,
/// then the uniqueness probe. Skips corner enumeration entirely.
pub fn classify_solved(optimal: &Tableau, origin_cost: &Rat) -> Result<Classification, SolveError> {
    if origin_cost != optimal.objective() {
        return Ok(Classification::NonVerifiable);
    }
    if optimal_embedding_is_unique(optimal)? {
        Ok(Classification::UniquelyVerifiable)
    } else {
        Ok(Classification::Verifiable)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombineError {
    #[error("corner sets describe different graphs")]
    MixedGraphs,
    #[error("combined corner count {count} exceeds the materialization cap {cap}")]
    MaterializationCap { count: u128, cap: u128 },
}

/// Default cap on materialized combined corners.
pub const DEFAULT_CORNER_CAP: u128 = 1_000_000;

/// Per-dimension corner sets combined into the d-dimensional picture.
/// Corners of the product are built lazily; only the count is eager.
#[derive(Debug, Clone)]
pub struct CombinedCorners<'a> {
    dims: &'a [CornerSet],
    pub classification: Classification,
    pub corner_count: u128,
}

impl<'a> CombinedCorners<'a> {
    pub fn dims(&self) -> &'a [CornerSet] {
        self.dims
    }

    /// Iterates the Cartesian product of per-dimension corners, one
    /// d-tuple at a time.
    pub fn iter(&self) -> impl Iterator<Item = Vec<&'a Corner>> + '_ {
        let dims = self.dims;
        let total = self.corner_count;
        (0..total).map(move |mut index| {
            let mut tuple = Vec::with_capacity(dims.len());
            for set in dims {
                let len = set.corners.len() as u128;
                tuple.push(&set.corners[(index % len) as usize]);
                index /= len;
            }
            tuple
        })
    }

    /// Materializes up to `cap` combined corners, failing when the exact
    /// count exceeds the cap.
    pub fn materialize(&self, cap: u128) -> Result<Vec<Vec<&'a Corner>>, CombineError> {
        if self.corner_count > cap {
            return Err(CombineError::MaterializationCap {
                count: self.corner_count,
                cap,
            });
        }
        Ok(self.iter().collect())
    }
}

/// Combines the per-dimension corner sets of one instance. The combined
/// verdict is unique only when every dimension is unique, verifiable only
/// when every dimension is verifiable.
pub fn combine_dimensions(dims: &[CornerSet]) -> Result<CombinedCorners<'_>, CombineError> {
    assert!(!dims.is_empty(), "need at least one dimension");
    let nodes = dims[0].num_nodes();
    let edges = dims[0].num_edges();
    if dims.iter().any(|d| d.num_nodes() != nodes || d.num_edges() != edges) {
        return Err(CombineError::MixedGraphs);
    }
    let corner_count = dims
        .iter()
        .map(|d| d.corners.len() as u128)
        .try_fold(1u128, u128::checked_mul)
        .expect("corner count fits in u128");
    let classification = if dims
        .iter()
        .all(|d| d.classification == Classification::UniquelyVerifiable)
    {
        Classification::UniquelyVerifiable
    } else if dims.iter().all(|d| d.classification.is_verifiable()) {
        Classification::Verifiable
    } else {
        Classification::NonVerifiable
    };
    Ok(CombinedCorners {
        dims,
        classification,
        corner_count,
    })
}

/// A maximal set of nodes pinned to their true positions, with the edges
/// among them. Edge indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

/// All maximal verifiable components of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentReport {
    pub components: Vec<Component>,
}

/// Nodes whose coordinate is zero in every corner of every dimension stay
/// congruent to the ground truth; their induced connected subgraphs are the
/// maximal verifiable components.
pub fn maximal_verifiable_components(
    dims: &[CornerSet],
    graph: &MeasurementGraph,
) -> ComponentReport {
    let mut pinned = vec![true; graph.num_nodes()];
    for set in dims {
        for corner in &set.corners {
            for (node, value) in corner.x.iter().enumerate() {
                if !value.is_zero() {
                    pinned[node] = false;
                }
            }
        }
    }
    let components = graph
        .induced_components(&pinned)
        .into_iter()
        .map(|nodes| {
            let edges = graph.induced_edge_indices(&nodes);
            Component { nodes, edges }
        })
        .collect();
    ComponentReport { components }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MeasurementGraph;
    use crate::instance::ProblemInstance;
    use crate::lp::build_lp;
    use crate::rational::int;

    fn solve(inst: &ProblemInstance) -> Tableau {
        let lp = build_lp(inst);
        let mut t = Tableau::initial(&lp);
        t.solve_dual_simplex().unwrap();
        t
    }

    fn instance(graph: MeasurementGraph, eps: &[i64]) -> ProblemInstance {
        let rows = eps.iter().map(|&v| vec![int(v)]).collect();
        ProblemInstance::new(graph, rows).unwrap()
    }

    fn triangle(eps: [i64; 3]) -> ProblemInstance {
        instance(
            MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap(),
            &eps,
        )
    }

    #[test]
    fn clean_instance_has_single_origin_corner() {
        let inst = triangle([0, 0, 0]);
        let t = solve(&inst);
        let set = enumerate_corners(&t, &inst);
        assert_eq!(set.classification, Classification::UniquelyVerifiable);
        assert_eq!(set.corners.len(), 1);
        assert!(set.corners[0].x.iter().all(Rat::is_zero));
        assert!(set.optimal_cost.is_zero());
    }

    #[test]
    fn triangle_outlier_yields_three_corners() {
        let inst = triangle([0, 0, 1]);
        let t = solve(&inst);
        let set = enumerate_corners(&t, &inst);
        assert_eq!(set.classification, Classification::Verifiable);
        assert_eq!(set.optimal_cost, int(1));
        let xs: Vec<(Rat, Rat)> = set
            .corners
            .iter()
            .map(|c| (c.x[1].clone(), c.x[2].clone()))
            .collect();
        assert_eq!(
            xs,
            vec![
                (int(0), int(0)),
                (int(0), int(1)),
                (int(1), int(1)),
            ]
        );
        for corner in &set.corners {
            let total: Rat = corner.edge_costs.iter().sum();
            assert_eq!(total, set.optimal_cost);
        }
    }

    #[test]
    fn exact_fit_beats_origin_on_single_edge() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let inst = instance(g, &[1]);
        let t = solve(&inst);
        let set = enumerate_corners(&t, &inst);
        assert_eq!(set.classification, Classification::NonVerifiable);
        assert_eq!(set.corners.len(), 1);
        assert_eq!(set.corners[0].x, vec![int(0), int(1)]);
    }

    #[test]
    fn classify_matches_stored_classification() {
        let inst = triangle([0, 0, 1]);
        let t = solve(&inst);
        let set = enumerate_corners(&t, &inst);
        assert_eq!(classify(&set), set.classification);
        assert_eq!(
            classify_solved(&t, &inst.origin_cost()).unwrap(),
            set.classification
        );
    }

    #[test]
    fn uniqueness_probe_agrees_with_enumeration() {
        for eps in [[0, 0, 0], [0, 0, 1], [1, 0, 0], [1, -1, 0]] {
            let inst = triangle(eps);
            let t = solve(&inst);
            let set = enumerate_corners(&t, &inst);
            let unique = optimal_embedding_is_unique(&t).unwrap();
            let origin_only = set.corners.len() == 1
                && set.corners[0].x.iter().all(Rat::is_zero)
                && set.classification != Classification::NonVerifiable;
            // Unique embedding means a single corner overall.
            assert_eq!(unique, set.corners.len() == 1);
            if origin_only {
                assert!(unique);
            }
        }
    }

    #[test]
    fn antiparallel_edges_keep_true_corners_only() {
        // Two opposite measurements in disagreement: the optimum is the
        // whole segment [-1, 1] for node 2, whose corners are the endpoints.
        // The origin is optimal yet not a corner.
        let g = MeasurementGraph::new(2, [(1, 2), (2, 1)]).unwrap();
        let inst = instance(g, &[1, 1]);
        let t = solve(&inst);
        let set = enumerate_corners(&t, &inst);
        assert_eq!(set.optimal_cost, int(2));
        assert_eq!(set.classification, Classification::Verifiable);
        let xs: Vec<Rat> = set.corners.iter().map(|c| c.x[1].clone()).collect();
        assert_eq!(xs, vec![int(-1), int(1)]);
    }

    #[test]
    fn combine_dimensions_multiplies_counts() {
        let one = triangle([0, 0, 1]);
        let clean = triangle([0, 0, 0]);
        let t1 = solve(&one);
        let t2 = solve(&clean);
        let dims = vec![enumerate_corners(&t1, &one), enumerate_corners(&t2, &clean)];
        let combined = combine_dimensions(&dims).unwrap();
        assert_eq!(combined.corner_count, 3);
        assert_eq!(combined.classification, Classification::Verifiable);
        assert_eq!(combined.iter().count(), 3);
        assert!(combined.materialize(2).is_err());
        assert_eq!(combined.materialize(3).unwrap().len(), 3);

        let both_clean = vec![dims[1].clone(), dims[1].clone()];
        let combined = combine_dimensions(&both_clean).unwrap();
        assert_eq!(combined.corner_count, 1);
        assert_eq!(combined.classification, Classification::UniquelyVerifiable);
    }

    #[test]
    fn combine_rejects_mixed_graphs() {
        let tri = triangle([0, 0, 0]);
        let k2 = instance(MeasurementGraph::new(2, [(1, 2)]).unwrap(), &[0]);
        let a = enumerate_corners(&solve(&tri), &tri);
        let b = enumerate_corners(&solve(&k2), &k2);
        assert_eq!(
            combine_dimensions(&[a, b]).unwrap_err(),
            CombineError::MixedGraphs
        );
    }

    #[test]
    fn components_cover_whole_graph_when_unique() {
        let inst = triangle([0, 0, 0]);
        let t = solve(&inst);
        let dims = vec![enumerate_corners(&t, &inst)];
        let report = maximal_verifiable_components(&dims, inst.graph());
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.components[0].nodes, vec![1, 2, 3]);
        assert_eq!(report.components[0].edges, vec![0, 1, 2]);
    }

    #[test]
    fn moving_nodes_drop_out_of_components() {
        let inst = triangle([0, 0, 1]);
        let t = solve(&inst);
        let dims = vec![enumerate_corners(&t, &inst)];
        let report = maximal_verifiable_components(&dims, inst.graph());
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.components[0].nodes, vec![1]);
    }

    #[test]
    fn pendant_outlier_leaves_clean_triangle_component() {
        let g = MeasurementGraph::new(4, [(1, 2), (2, 3), (1, 3), (3, 4)]).unwrap();
        let inst = instance(g, &[0, 0, 0, 1]);
        let t = solve(&inst);
        let set = enumerate_corners(&t, &inst);
        assert_eq!(set.classification, Classification::NonVerifiable);
        assert_eq!(set.corners.len(), 1);
        assert_eq!(set.corners[0].x, vec![int(0), int(0), int(0), int(1)]);
        let report = maximal_verifiable_components(&[set], inst.graph());
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.components[0].nodes, vec![1, 2, 3]);
    }
}
