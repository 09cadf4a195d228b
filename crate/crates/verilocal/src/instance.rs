//! Canonical problem instances and the reductions that produce them.
//!
//! An instance stores, per edge and per dimension, the residual the
//! measurement would leave at the true embedding. After canonicalization the
//! true embedding sits at the origin, so those residuals are exactly the
//! outlier values and the gauge node contributes nothing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::MeasurementGraph;
use crate::outlier::{ModelError, OutlierModel, Sign, SignedOutlierSupport};
use crate::rational::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("expected {expected} {what}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("embedding must have at least one coordinate per node")]
    EmptyDimension,
    #[error("outlier magnitude {0} must be strictly positive")]
    NonPositiveMagnitude(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Positions for every node, all with the same dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    positions: Vec<Vec<Rat>>,
    dim: usize,
}

impl Embedding {
    pub fn new(positions: Vec<Vec<Rat>>) -> Result<Self, InstanceError> {
        let dim = positions.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(InstanceError::EmptyDimension);
        }
        for row in &positions {
            if row.len() != dim {
                return Err(InstanceError::DimensionMismatch {
                    what: "coordinates in a node position",
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        Ok(Embedding { positions, dim })
    }

    pub fn origin(num_nodes: usize, dim: usize) -> Self {
        Embedding {
            positions: vec![vec![Rat::zero(); dim]; num_nodes],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.positions.len()
    }

    /// Position of a 1-based node id.
    pub fn position(&self, node: usize) -> &[Rat] {
        &self.positions[node - 1]
    }

    /// The same embedding shifted by a constant vector.
    pub fn translated(&self, shift: &[Rat]) -> Result<Self, InstanceError> {
        if shift.len() != self.dim {
            return Err(InstanceError::DimensionMismatch {
                what: "coordinates in the shift",
                expected: self.dim,
                found: shift.len(),
            });
        }
        let positions = self
            .positions
            .iter()
            .map(|row| row.iter().zip(shift).map(|(a, b)| a + b).collect())
            .collect();
        Ok(Embedding {
            positions,
            dim: self.dim,
        })
    }
}

/// A canonical localization problem: graph plus per-edge, per-dimension
/// exact outlier values. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    graph: MeasurementGraph,
    epsilon: Vec<Vec<Rat>>,
    dim: usize,
}

impl ProblemInstance {
    pub fn new(graph: MeasurementGraph, epsilon: Vec<Vec<Rat>>) -> Result<Self, InstanceError> {
        if epsilon.len() != graph.num_edges() {
            return Err(InstanceError::DimensionMismatch {
                what: "epsilon rows (one per edge)",
                expected: graph.num_edges(),
                found: epsilon.len(),
            });
        }
        let dim = epsilon.first().map_or(1, Vec::len);
        if dim == 0 {
            return Err(InstanceError::EmptyDimension);
        }
        for row in &epsilon {
            if row.len() != dim {
                return Err(InstanceError::DimensionMismatch {
                    what: "epsilon entries on an edge",
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        Ok(ProblemInstance {
            graph,
            epsilon,
            dim,
        })
    }

    /// All-zero outliers in the given dimension.
    pub fn clean(graph: MeasurementGraph, dim: usize) -> Self {
        let epsilon = vec![vec![Rat::zero(); dim]; graph.num_edges()];
        ProblemInstance {
            graph,
            epsilon,
            dim,
        }
    }

    pub fn graph(&self) -> &MeasurementGraph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self, edge_index: usize, k: usize) -> &Rat {
        &self.epsilon[edge_index][k]
    }

    pub fn epsilon_row(&self, edge_index: usize) -> &[Rat] {
        &self.epsilon[edge_index]
    }

    /// The single outlier value of an edge in a one-dimensional instance.
    pub fn epsilon_1d(&self, edge_index: usize) -> &Rat {
        debug_assert_eq!(self.dim, 1);
        &self.epsilon[edge_index][0]
    }

    /// One 1-D instance per dimension, sharing the graph.
    pub fn split_dimensions(&self) -> Vec<ProblemInstance> {
        (0..self.dim)
            .map(|k| ProblemInstance {
                graph: self.graph.clone(),
                epsilon: self.epsilon.iter().map(|row| vec![row[k].clone()]).collect(),
                dim: 1,
            })
            .collect()
    }

    /// The canonical objective at an embedding: the summed absolute
    /// residuals over all edges and dimensions.
    pub fn objective_at(&self, embedding: &Embedding) -> Result<Rat, InstanceError> {
        if embedding.num_nodes() != self.graph.num_nodes() {
            return Err(InstanceError::DimensionMismatch {
                what: "nodes in the embedding",
                expected: self.graph.num_nodes(),
                found: embedding.num_nodes(),
            });
        }
        if embedding.dim() != self.dim {
            return Err(InstanceError::DimensionMismatch {
                what: "embedding dimensions",
                expected: self.dim,
                found: embedding.dim(),
            });
        }
        let mut total = Rat::zero();
        for (e, edge) in self.graph.edges().iter().enumerate() {
            let xi = embedding.position(edge.i);
            let xj = embedding.position(edge.j);
            for k in 0..self.dim {
                total += (&xj[k] - &xi[k] - &self.epsilon[e][k]).abs();
            }
        }
        Ok(total)
    }

    /// Objective at the origin, which equals the summed outlier magnitudes.
    pub fn origin_cost(&self) -> Rat {
        self.epsilon
            .iter()
            .flat_map(|row| row.iter())
            .map(Signed::abs)
            .sum()
    }
}

/// Shifts a measured problem so the ground truth sits at the origin,
/// leaving `epsilon[e][k] = t_e[k] - (x*_j[k] - x*_i[k])`.
pub fn canonicalize(
    graph: MeasurementGraph,
    measurements: &[Vec<Rat>],
    ground_truth: &Embedding,
) -> Result<ProblemInstance, InstanceError> {
    if ground_truth.num_nodes() != graph.num_nodes() {
        return Err(InstanceError::DimensionMismatch {
            what: "nodes in the ground truth",
            expected: graph.num_nodes(),
            found: ground_truth.num_nodes(),
        });
    }
    if measurements.len() != graph.num_edges() {
        return Err(InstanceError::DimensionMismatch {
            what: "measurements (one per edge)",
            expected: graph.num_edges(),
            found: measurements.len(),
        });
    }
    let dim = ground_truth.dim();
    let mut epsilon = Vec::with_capacity(measurements.len());
    for (e, edge) in graph.edges().iter().enumerate() {
        let t = &measurements[e];
        if t.len() != dim {
            return Err(InstanceError::DimensionMismatch {
                what: "measurement coordinates",
                expected: dim,
                found: t.len(),
            });
        }
        let xi = ground_truth.position(edge.i);
        let xj = ground_truth.position(edge.j);
        let row: Vec<Rat> = (0..dim).map(|k| &t[k] - (&xj[k] - &xi[k])).collect();
        epsilon.push(row);
    }
    ProblemInstance::new(graph, epsilon)
}

/// Builds the 1-D instance with `+magnitude` or `-magnitude` on each support
/// edge and zero elsewhere. Any positive magnitude yields the same
/// verifiability verdict, so callers usually pass 1.
pub fn realize_support(
    graph: &MeasurementGraph,
    support: &SignedOutlierSupport,
    magnitude: &Rat,
) -> Result<ProblemInstance, InstanceError> {
    if !magnitude.is_positive() {
        return Err(InstanceError::NonPositiveMagnitude(
            crate::rational::format_rat(magnitude),
        ));
    }
    let mut epsilon = vec![vec![Rat::zero()]; graph.num_edges()];
    for (edge_index, sign) in support.iter() {
        epsilon[edge_index][0] = match sign {
            Sign::Plus => magnitude.clone(),
            Sign::Minus => -magnitude.clone(),
        };
    }
    ProblemInstance::new(graph.clone(), epsilon)
}

/// Draws a random instance from the outlier model, i.i.d. across edges and
/// dimensions. Deterministic for a fixed seed.
pub fn sample_outliers(
    graph: &MeasurementGraph,
    model: &OutlierModel,
    dim: usize,
    seed: u64,
) -> Result<ProblemInstance, InstanceError> {
    if model.num_edges() != graph.num_edges() {
        return Err(ModelError::EdgeCountMismatch {
            model_edges: model.num_edges(),
            graph_edges: graph.num_edges(),
        }
        .into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut epsilon = Vec::with_capacity(graph.num_edges());
    for e in 0..graph.num_edges() {
        let mut row = Vec::with_capacity(dim);
        for _ in 0..dim {
            let draw = unit_rational(&mut rng);
            let value = if &draw < model.p_plus(e) {
                let (lo, hi) = model.positive_range();
                uniform_in(lo, hi, &mut rng)
            } else if draw < model.p_plus(e) + model.p_minus(e) {
                let (lo, hi) = model.negative_range();
                uniform_in(lo, hi, &mut rng)
            } else {
                Rat::zero()
            };
            row.push(value);
        }
        epsilon.push(row);
    }
    ProblemInstance::new(graph.clone(), epsilon)
}

/// A uniform rational in [0, 1) with 64 bits of resolution.
fn unit_rational(rng: &mut ChaCha8Rng) -> Rat {
    let numer: u64 = rng.gen();
    BigRational::new(BigInt::from(numer), BigInt::from(2u128.pow(64)))
}

/// A uniform rational on a 2^32-point grid over [lo, hi).
fn uniform_in(lo: &Rat, hi: &Rat, rng: &mut ChaCha8Rng) -> Rat {
    let step: u32 = rng.gen();
    let frac = BigRational::new(BigInt::from(step), BigInt::from(1u64 << 32));
    lo + (hi - lo) * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outlier::default_ranges;
    use crate::rational::{int, rat};

    fn triangle() -> MeasurementGraph {
        MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap()
    }

    #[test]
    fn canonicalize_exact_measurements_leaves_zero_outliers() {
        let g = triangle();
        let truth = Embedding::new(vec![vec![int(0)], vec![int(4)], vec![int(9)]]).unwrap();
        let measurements = vec![vec![int(4)], vec![int(5)], vec![int(9)]];
        let inst = canonicalize(g, &measurements, &truth).unwrap();
        assert!(inst.epsilon_row(0).iter().all(Rat::is_zero));
        assert!(inst.origin_cost().is_zero());
    }

    #[test]
    fn canonicalize_two_node_example() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let truth = Embedding::new(vec![vec![int(0)], vec![int(5)]]).unwrap();
        let inst = canonicalize(g, &[vec![int(8)]], &truth).unwrap();
        assert_eq!(*inst.epsilon_1d(0), int(3));
    }

    #[test]
    fn canonicalize_ignores_global_translation() {
        let g = triangle();
        let truth = Embedding::new(vec![
            vec![int(1), int(-2)],
            vec![int(3), int(0)],
            vec![int(-1), int(5)],
        ])
        .unwrap();
        let shifted = truth.translated(&[int(7), rat(-3, 2)]).unwrap();
        let measurements = vec![
            vec![int(2), int(2)],
            vec![int(-4), int(5)],
            vec![int(-2), int(7)],
        ];
        let a = canonicalize(g.clone(), &measurements, &truth).unwrap();
        let b = canonicalize(g, &measurements, &shifted).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn canonicalize_rejects_dimension_mismatch() {
        let g = triangle();
        let truth = Embedding::new(vec![vec![int(0)], vec![int(1)], vec![int(2)]]).unwrap();
        let err = canonicalize(g, &[vec![int(1), int(2)], vec![int(0)], vec![int(0)]], &truth)
            .unwrap_err();
        assert!(matches!(err, InstanceError::DimensionMismatch { .. }));
    }

    #[test]
    fn split_dimensions_projects_each_coordinate() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let inst = ProblemInstance::new(g, vec![vec![int(3), int(-1)]]).unwrap();
        let dims = inst.split_dimensions();
        assert_eq!(dims.len(), 2);
        assert_eq!(*dims[0].epsilon_1d(0), int(3));
        assert_eq!(*dims[1].epsilon_1d(0), int(-1));

        let one_d = dims[0].split_dimensions();
        assert_eq!(one_d.len(), 1);
        assert_eq!(one_d[0], dims[0]);
    }

    #[test]
    fn objective_sums_over_dimensions() {
        let g = triangle();
        let inst = ProblemInstance::new(
            g,
            vec![
                vec![int(1), int(0)],
                vec![int(0), int(-2)],
                vec![rat(1, 2), int(1)],
            ],
        )
        .unwrap();
        let point = Embedding::new(vec![
            vec![int(0), int(0)],
            vec![int(1), rat(-1, 3)],
            vec![int(-1), int(2)],
        ])
        .unwrap();
        let total = inst.objective_at(&point).unwrap();
        let per_dim: Rat = inst
            .split_dimensions()
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let coords = (1..=3)
                    .map(|n| vec![point.position(n)[k].clone()])
                    .collect();
                d.objective_at(&Embedding::new(coords).unwrap()).unwrap()
            })
            .sum();
        assert_eq!(total, per_dim);
    }

    #[test]
    fn realize_support_places_signed_magnitudes() {
        let g = MeasurementGraph::complete(5);
        let support =
            SignedOutlierSupport::new([(2, Sign::Plus), (6, Sign::Minus)], g.num_edges()).unwrap();
        let inst = realize_support(&g, &support, &int(1)).unwrap();
        assert_eq!(*inst.epsilon_1d(2), int(1));
        assert_eq!(*inst.epsilon_1d(6), int(-1));
        assert!(inst.epsilon_1d(0).is_zero());

        let empty = realize_support(&g, &SignedOutlierSupport::empty(), &int(1)).unwrap();
        assert!(empty.origin_cost().is_zero());

        assert!(matches!(
            realize_support(&g, &support, &int(0)),
            Err(InstanceError::NonPositiveMagnitude(_))
        ));
    }

    #[test]
    fn sample_outliers_is_deterministic_per_seed() {
        let g = MeasurementGraph::complete(4);
        let (neg, pos) = default_ranges();
        let model = OutlierModel::homogeneous(6, rat(1, 4), rat(1, 4), neg, pos).unwrap();
        let a = sample_outliers(&g, &model, 2, 99).unwrap();
        let b = sample_outliers(&g, &model, 2, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_outliers(&g, &model, 2, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_outliers_respect_signed_ranges() {
        let g = MeasurementGraph::complete(4);
        let (neg, pos) = default_ranges();
        let model = OutlierModel::homogeneous(6, rat(2, 5), rat(2, 5), neg, pos).unwrap();
        let inst = sample_outliers(&g, &model, 1, 7).unwrap();
        for e in 0..6 {
            let v = inst.epsilon_1d(e);
            assert!(
                v.is_zero()
                    || (*v >= int(1) && *v < int(2))
                    || (*v >= int(-2) && *v < int(-1)),
                "value {v} outside the model ranges"
            );
        }
    }
}
