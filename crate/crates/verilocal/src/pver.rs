//! The verifiability indicator and the a-priori verifiability probability.
//!
//! Exact mode enumerates every signed outlier support (3^|E| of them),
//! decides each with the dual simplex at unit magnitude, and accumulates an
//! exact probability-weighted sum next to a per-cardinality census. The
//! census also yields the closed-form polynomial in the symmetric
//! equal-probability model, giving a second route to the same number.
//! Monte Carlo mode scales past exhaustive enumeration.

use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::corners::{classify_solved, Classification};
use crate::graph::MeasurementGraph;
use crate::instance::realize_support;
use crate::lp::build_lp;
use crate::outlier::{OutlierModel, Sign, SignedOutlierSupport};
use crate::rational::{int, Rat};
use crate::tableau::{SolveError, Tableau};

/// Default ceiling on exhaustive support enumeration.
pub const DEFAULT_SUPPORT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PverError {
    #[error(
        "3^{num_edges} = {supports} signed supports exceeds the budget {budget}; use Monte Carlo"
    )]
    BudgetExceeded {
        num_edges: usize,
        supports: u64,
        budget: u64,
    },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Solves the unit-magnitude realization of a support and returns the
/// optimal tableau with the origin cost (the summed outlier magnitudes).
fn solve_support(
    graph: &MeasurementGraph,
    support: &SignedOutlierSupport,
) -> Result<(Tableau, Rat), SolveError> {
    let inst = realize_support(graph, support, &int(1)).expect("unit magnitude is positive");
    let lp = build_lp(&inst);
    let mut tableau = Tableau::initial(&lp);
    tableau.solve_dual_simplex()?;
    let origin_cost = inst.origin_cost();
    Ok((tableau, origin_cost))
}

/// The verifiability indicator: true when the ground truth attains the
/// optimum for this signed support. Magnitudes are irrelevant, so the
/// support is realized at unit magnitude.
pub fn ver(graph: &MeasurementGraph, support: &SignedOutlierSupport) -> Result<bool, SolveError> {
    let (tableau, origin_cost) = solve_support(graph, support)?;
    Ok(origin_cost == *tableau.objective())
}

/// Three-way verdict for a signed support, without corner enumeration.
pub fn classify_support(
    graph: &MeasurementGraph,
    support: &SignedOutlierSupport,
) -> Result<Classification, SolveError> {
    let (tableau, origin_cost) = solve_support(graph, support)?;
    classify_solved(&tableau, &origin_cost)
}

/// Prior probability of one signed support under the model: the product of
/// per-edge factors. Sums to one over all 3^|E| supports.
pub fn support_probability(model: &OutlierModel, support: &SignedOutlierSupport) -> Rat {
    let mut probability = Rat::one();
    for e in 0..model.num_edges() {
        probability *= match support.sign_of(e) {
            Some(Sign::Plus) => model.p_plus(e).clone(),
            Some(Sign::Minus) => model.p_minus(e).clone(),
            None => model.p_none(e),
        };
    }
    probability
}

/// Census of signed supports grouped by outlier count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub outlier_count: usize,
    pub total: u64,
    pub verifiable: u64,
    pub uniquely_verifiable: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportCensus {
    pub rows: Vec<CensusRow>,
}

impl SupportCensus {
    pub fn verifiable_counts(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.verifiable).collect()
    }

    pub fn totals(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.total).collect()
    }

    /// CSV rows `k,total,verifiable,uniquely_verifiable` with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,total,verifiable,uniquely_verifiable\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.outlier_count, row.total, row.verifiable, row.uniquely_verifiable
            ));
        }
        out
    }
}

/// Verifiable-count coefficients of the probability polynomial under the
/// symmetric model with per-sign probability p/2:
/// `p_ver(p) = sum_k count_k (p/2)^k (1-p)^(|E|-k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PverPolynomial {
    pub coefficients: Vec<u64>,
    pub num_edges: usize,
}

impl PverPolynomial {
    pub fn evaluate(&self, p: &Rat) -> Rat {
        let half_p = p / int(2);
        let keep = Rat::one() - p;
        let mut total = Rat::zero();
        for (k, &count) in self.coefficients.iter().enumerate() {
            let mut term = Rat::from_integer(count.into());
            for _ in 0..k {
                term *= &half_p;
            }
            for _ in 0..(self.num_edges - k) {
                term *= &keep;
            }
            total += term;
        }
        total
    }
}

/// Exhaustive verifiability probability with its census and polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPver {
    pub p_ver: Rat,
    pub census: SupportCensus,
    pub polynomial: PverPolynomial,
}

/// Decodes support number `index` written in base 3, one digit per edge:
/// 0 none, 1 positive, 2 negative.
fn support_from_index(index: u64, num_edges: usize) -> SignedOutlierSupport {
    let mut rest = index;
    let mut entries = Vec::new();
    for e in 0..num_edges {
        match rest % 3 {
            1 => entries.push((e, Sign::Plus)),
            2 => entries.push((e, Sign::Minus)),
            _ => {}
        }
        rest /= 3;
    }
    SignedOutlierSupport::new(entries, num_edges).expect("indices in range")
}

#[derive(Clone)]
struct CensusAccumulator {
    verifiable: Vec<u64>,
    unique: Vec<u64>,
    counted: Vec<u64>,
    weighted: Rat,
    error: Option<SolveError>,
}

impl CensusAccumulator {
    fn new(num_edges: usize) -> Self {
        CensusAccumulator {
            verifiable: vec![0; num_edges + 1],
            unique: vec![0; num_edges + 1],
            counted: vec![0; num_edges + 1],
            weighted: Rat::zero(),
            error: None,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.verifiable.iter_mut().zip(&other.verifiable) {
            *a += b;
        }
        for (a, b) in self.unique.iter_mut().zip(&other.unique) {
            *a += b;
        }
        for (a, b) in self.counted.iter_mut().zip(&other.counted) {
            *a += b;
        }
        self.weighted += other.weighted;
        self.error = self.error.or(other.error);
        self
    }
}

/// Enumerates every signed support, classifies each once, and returns the
/// exact probability together with the census and the polynomial.
///
/// Evaluations are independent and merged commutatively, so the result does
/// not depend on scheduling.
pub fn exact_p_ver(
    graph: &MeasurementGraph,
    model: &OutlierModel,
    budget: u64,
) -> Result<ExactPver, PverError> {
    assert_eq!(model.num_edges(), graph.num_edges());
    let num_edges = graph.num_edges();
    let supports = match 3u64.checked_pow(num_edges as u32) {
        Some(count) if count <= budget => count,
        overflow_or_large => {
            return Err(PverError::BudgetExceeded {
                num_edges,
                supports: overflow_or_large.unwrap_or(u64::MAX),
                budget,
            })
        }
    };

    let accumulated = (0..supports)
        .into_par_iter()
        .fold(
            || CensusAccumulator::new(num_edges),
            |mut acc, index| {
                if acc.error.is_some() {
                    return acc;
                }
                let support = support_from_index(index, num_edges);
                let k = support.len();
                match classify_support(graph, &support) {
                    Ok(classification) => {
                        acc.counted[k] += 1;
                        if classification.is_verifiable() {
                            acc.verifiable[k] += 1;
                            acc.weighted += support_probability(model, &support);
                        }
                        if classification == Classification::UniquelyVerifiable {
                            acc.unique[k] += 1;
                        }
                    }
                    Err(e) => acc.error = Some(e),
                }
                acc
            },
        )
        .reduce(
            || CensusAccumulator::new(num_edges),
            CensusAccumulator::merge,
        );
    if let Some(error) = accumulated.error {
        return Err(error.into());
    }

    let rows: Vec<CensusRow> = (0..=num_edges)
        .map(|k| {
            let total = binomial(num_edges as u64, k as u64) * 2u64.pow(k as u32);
            debug_assert_eq!(total, accumulated.counted[k]);
            CensusRow {
                outlier_count: k,
                total,
                verifiable: accumulated.verifiable[k],
                uniquely_verifiable: accumulated.unique[k],
            }
        })
        .collect();
    let census = SupportCensus { rows };
    let polynomial = PverPolynomial {
        coefficients: census.verifiable_counts(),
        num_edges,
    };
    Ok(ExactPver {
        p_ver: accumulated.weighted,
        census,
        polynomial,
    })
}

/// Monte Carlo estimate of the verifiability probability.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    /// Half-width of the 95% normal-approximation confidence interval.
    pub ci_half_width: f64,
    pub samples: u64,
    pub verifiable_samples: u64,
}

/// Samples signed supports from the model and averages the indicator.
/// Sample `i` uses its own deterministic RNG stream, so the estimate is
/// reproducible for a fixed seed at any parallelism.
pub fn monte_carlo_p_ver(
    graph: &MeasurementGraph,
    model: &OutlierModel,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, SolveError> {
    assert!(samples >= 1);
    assert_eq!(model.num_edges(), graph.num_edges());
    let num_edges = graph.num_edges();
    let thresholds: Vec<(f64, f64)> = (0..num_edges)
        .map(|e| {
            let pp = model.p_plus(e).to_f64().expect("probability fits in f64");
            let pm = model.p_minus(e).to_f64().expect("probability fits in f64");
            (pp, pp + pm)
        })
        .collect();

    let hits: Result<u64, SolveError> = (0..samples)
        .into_par_iter()
        .map_init(
            std::collections::HashMap::<Vec<i8>, bool>::new,
            |cache, sample_index| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(sample_index);
                let mut digits = vec![0i8; num_edges];
                for (e, digit) in digits.iter_mut().enumerate() {
                    let draw: f64 = rng.gen();
                    *digit = if draw < thresholds[e].0 {
                        1
                    } else if draw < thresholds[e].1 {
                        -1
                    } else {
                        0
                    };
                }
                if let Some(&verdict) = cache.get(&digits) {
                    return Ok(u64::from(verdict));
                }
                let entries = digits.iter().enumerate().filter_map(|(e, &d)| match d {
                    1 => Some((e, Sign::Plus)),
                    -1 => Some((e, Sign::Minus)),
                    _ => None,
                });
                let support =
                    SignedOutlierSupport::new(entries, num_edges).expect("indices in range");
                let verdict = ver(graph, &support)?;
                cache.insert(digits, verdict);
                Ok(u64::from(verdict))
            },
        )
        .try_reduce(|| 0, |a, b| Ok(a + b));
    let hits = hits?;

    let n = samples as f64;
    let estimate = hits as f64 / n;
    let ci_half_width = 1.96 * (estimate * (1.0 - estimate) / n).sqrt();
    Ok(MonteCarloEstimate {
        estimate,
        ci_half_width,
        samples,
        verifiable_samples: hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outlier::default_ranges;
    use crate::rational::rat;

    fn model_for(graph: &MeasurementGraph, pp: Rat, pm: Rat) -> OutlierModel {
        let (neg, pos) = default_ranges();
        OutlierModel::homogeneous(graph.num_edges(), pp, pm, neg, pos).unwrap()
    }

    #[test]
    fn empty_support_is_always_verifiable() {
        let g = MeasurementGraph::complete(5);
        assert!(ver(&g, &SignedOutlierSupport::empty()).unwrap());
    }

    #[test]
    fn single_edge_outlier_is_never_verifiable() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let support = SignedOutlierSupport::new([(0, Sign::Plus)], 1).unwrap();
        assert!(!ver(&g, &support).unwrap());
    }

    #[test]
    fn triangle_single_outlier_is_verifiable() {
        let g = MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let support = SignedOutlierSupport::new([(2, Sign::Plus)], 3).unwrap();
        assert!(ver(&g, &support).unwrap());
        assert_eq!(
            classify_support(&g, &support).unwrap(),
            Classification::Verifiable
        );
    }

    #[test]
    fn support_probability_examples() {
        let g = MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let model = model_for(&g, rat(1, 10), rat(1, 10));
        let p = support_probability(&model, &SignedOutlierSupport::empty());
        assert_eq!(p, rat(64, 125));

        let g2 = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let model2 = model_for(&g2, rat(1, 4), rat(1, 10));
        let full = SignedOutlierSupport::new([(0, Sign::Plus)], 1).unwrap();
        assert_eq!(support_probability(&model2, &full), rat(1, 4));
    }

    #[test]
    fn support_probabilities_sum_to_one() {
        let g = MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let model = model_for(&g, rat(3, 20), rat(1, 5));
        let total: Rat = (0..3u64.pow(3))
            .map(|idx| support_probability(&model, &support_from_index(idx, 3)))
            .sum();
        assert_eq!(total, Rat::one());
    }

    #[test]
    fn single_edge_exact_p_ver_is_probability_of_no_outlier() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let model = model_for(&g, rat(1, 8), rat(1, 4));
        let exact = exact_p_ver(&g, &model, DEFAULT_SUPPORT_BUDGET).unwrap();
        assert_eq!(exact.p_ver, Rat::one() - rat(1, 8) - rat(1, 4));
        assert_eq!(exact.census.rows[0].verifiable, 1);
        assert_eq!(exact.census.rows[0].uniquely_verifiable, 1);
        assert_eq!(exact.census.rows[1].verifiable, 0);
        assert_eq!(exact.polynomial.coefficients, vec![1, 0]);
    }

    #[test]
    fn budget_rejection_points_to_monte_carlo() {
        let g = MeasurementGraph::complete(5);
        let model = model_for(&g, rat(1, 10), rat(1, 10));
        let err = exact_p_ver(&g, &model, 100).unwrap_err();
        assert_eq!(
            err,
            PverError::BudgetExceeded {
                num_edges: 10,
                supports: 59049,
                budget: 100
            }
        );
    }

    #[test]
    fn weighted_sum_matches_polynomial_on_triangle() {
        let g = MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let p = rat(1, 5);
        let model = model_for(&g, &p / int(2), &p / int(2));
        let exact = exact_p_ver(&g, &model, DEFAULT_SUPPORT_BUDGET).unwrap();
        assert_eq!(exact.p_ver, exact.polynomial.evaluate(&p));
        assert_eq!(exact.polynomial.evaluate(&Rat::zero()), Rat::one());
    }

    #[test]
    fn census_csv_layout() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let model = model_for(&g, rat(1, 10), rat(1, 10));
        let exact = exact_p_ver(&g, &model, DEFAULT_SUPPORT_BUDGET).unwrap();
        let csv = exact.census.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,total,verifiable,uniquely_verifiable");
        assert_eq!(lines[1], "0,1,1,1");
        assert_eq!(lines[2], "1,2,0,0");
    }

    #[test]
    fn monte_carlo_is_deterministic_and_sane() {
        let g = MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let model = model_for(&g, rat(1, 10), rat(1, 10));
        let a = monte_carlo_p_ver(&g, &model, 500, 42).unwrap();
        let b = monte_carlo_p_ver(&g, &model, 500, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.estimate >= 0.0 && a.estimate <= 1.0);

        let tiny = model_for(&g, rat(1, 1_000_000), rat(1, 1_000_000));
        let c = monte_carlo_p_ver(&g, &tiny, 400, 7).unwrap();
        assert!(c.estimate > 0.99);
    }
}
