//! Signed outlier supports and the per-edge stochastic outlier model.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::Rat;

/// Sign of an outlier on an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SupportError {
    #[error("support references edge index {index}, graph has {num_edges} edges")]
    BadEdgeIndex { index: usize, num_edges: usize },
    #[error("edge index {index} appears twice in the support")]
    DuplicateEntry { index: usize },
}

/// A set of edges carrying outliers, each with the outlier's sign.
/// Edge indices are 0-based positions into the graph's edge list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignedOutlierSupport {
    entries: BTreeMap<usize, Sign>,
}

impl SignedOutlierSupport {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I>(entries: I, num_edges: usize) -> Result<Self, SupportError>
    where
        I: IntoIterator<Item = (usize, Sign)>,
    {
        let mut map = BTreeMap::new();
        for (index, sign) in entries {
            if index >= num_edges {
                return Err(SupportError::BadEdgeIndex { index, num_edges });
            }
            if map.insert(index, sign).is_some() {
                return Err(SupportError::DuplicateEntry { index });
            }
        }
        Ok(SignedOutlierSupport { entries: map })
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign)> + '_ {
        self.entries.iter().map(|(&k, &s)| (k, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sign_of(&self, edge_index: usize) -> Option<Sign> {
        self.entries.get(&edge_index).copied()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("outlier probability {value} for edge e{index} must lie strictly inside (0,1)")]
    ProbabilityOutOfRange { index: usize, value: String },
    #[error("p_plus + p_minus = {sum} for edge e{index} must be strictly below 1")]
    ProbabilitySumTooLarge { index: usize, sum: String },
    #[error("magnitude range [{lo}, {hi}] must be a bounded nonempty interval that excludes 0 and is {expected}")]
    BadMagnitudeRange {
        lo: String,
        hi: String,
        expected: &'static str,
    },
    #[error("model covers {model_edges} edges, graph has {graph_edges}")]
    EdgeCountMismatch {
        model_edges: usize,
        graph_edges: usize,
    },
}

/// Per-edge outlier probabilities plus the magnitude intervals the signed
/// uniform draws come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutlierModel {
    p_plus: Vec<Rat>,
    p_minus: Vec<Rat>,
    negative_range: (Rat, Rat),
    positive_range: (Rat, Rat),
}

impl OutlierModel {
    /// Same probabilities on every edge.
    pub fn homogeneous(
        num_edges: usize,
        p_plus: Rat,
        p_minus: Rat,
        negative_range: (Rat, Rat),
        positive_range: (Rat, Rat),
    ) -> Result<Self, ModelError> {
        Self::per_edge(
            vec![p_plus; num_edges],
            vec![p_minus; num_edges],
            negative_range,
            positive_range,
        )
    }

    pub fn per_edge(
        p_plus: Vec<Rat>,
        p_minus: Vec<Rat>,
        negative_range: (Rat, Rat),
        positive_range: (Rat, Rat),
    ) -> Result<Self, ModelError> {
        assert_eq!(p_plus.len(), p_minus.len());
        let one = Rat::one();
        for (index, p) in p_plus.iter().chain(p_minus.iter()).enumerate() {
            if *p <= Rat::zero() || *p >= one {
                return Err(ModelError::ProbabilityOutOfRange {
                    index: index % p_plus.len() + 1,
                    value: crate::rational::format_rat(p),
                });
            }
        }
        for index in 0..p_plus.len() {
            let sum = &p_plus[index] + &p_minus[index];
            if sum >= one {
                return Err(ModelError::ProbabilitySumTooLarge {
                    index: index + 1,
                    sum: crate::rational::format_rat(&sum),
                });
            }
        }
        if negative_range.0 >= negative_range.1 || negative_range.1 >= Rat::zero() {
            return Err(ModelError::BadMagnitudeRange {
                lo: crate::rational::format_rat(&negative_range.0),
                hi: crate::rational::format_rat(&negative_range.1),
                expected: "strictly negative",
            });
        }
        if positive_range.0 >= positive_range.1 || positive_range.0 <= Rat::zero() {
            return Err(ModelError::BadMagnitudeRange {
                lo: crate::rational::format_rat(&positive_range.0),
                hi: crate::rational::format_rat(&positive_range.1),
                expected: "strictly positive",
            });
        }
        Ok(OutlierModel {
            p_plus,
            p_minus,
            negative_range,
            positive_range,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.p_plus.len()
    }

    pub fn p_plus(&self, edge_index: usize) -> &Rat {
        &self.p_plus[edge_index]
    }

    pub fn p_minus(&self, edge_index: usize) -> &Rat {
        &self.p_minus[edge_index]
    }

    /// Probability that an edge carries no outlier.
    pub fn p_none(&self, edge_index: usize) -> Rat {
        Rat::one() - &self.p_plus[edge_index] - &self.p_minus[edge_index]
    }

    pub fn negative_range(&self) -> (&Rat, &Rat) {
        (&self.negative_range.0, &self.negative_range.1)
    }

    pub fn positive_range(&self) -> (&Rat, &Rat) {
        (&self.positive_range.0, &self.positive_range.1)
    }

    /// True when every edge has identical `p_plus == p_minus`, the setting
    /// the closed-form probability polynomial is written for.
    pub fn is_symmetric_homogeneous(&self) -> bool {
        self.p_plus
            .iter()
            .zip(&self.p_minus)
            .all(|(pp, pm)| pp == pm)
            && self.p_plus.windows(2).all(|w| w[0] == w[1])
    }
}

/// Default magnitude intervals used by samplers when the caller does not
/// care about magnitudes (verdicts never depend on them).
pub fn default_ranges() -> ((Rat, Rat), (Rat, Rat)) {
    (
        (crate::rational::int(-2), crate::rational::int(-1)),
        (crate::rational::int(1), crate::rational::int(2)),
    )
}
