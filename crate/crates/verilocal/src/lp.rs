//! Standard-form LP assembly for one-dimensional canonical instances.
//!
//! Each edge contributes one constraint pair: the signed residual plus a
//! slack equals the edge cost in both orientations. Node coordinates are
//! split into nonnegative parts, and the gauge node's columns are dropped
//! entirely rather than constrained to zero.
//!
//! Column order is `x+_2..x+_n, x-_2..x-_n, Z_1..Z_m, S+_1..S+_m,
//! S-_1..S-_m`; the right-hand side stacks the outlier values and then
//! their negations.

use std::fmt;

use num_traits::{One, Zero};

use crate::instance::ProblemInstance;
use crate::rational::Rat;

/// What an LP column stands for. Node and edge numbers are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnLabel {
    /// Positive part of a node coordinate.
    XPlus(usize),
    /// Negative part of a node coordinate.
    XMinus(usize),
    /// Absolute residual of an edge.
    Z(usize),
    /// Slack of the forward residual constraint of an edge.
    SPlus(usize),
    /// Slack of the reversed residual constraint of an edge.
    SMinus(usize),
}

impl fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnLabel::XPlus(node) => write!(f, "x+_{node}"),
            ColumnLabel::XMinus(node) => write!(f, "x-_{node}"),
            ColumnLabel::Z(edge) => write!(f, "Z_{edge}"),
            ColumnLabel::SPlus(edge) => write!(f, "S+_{edge}"),
            ColumnLabel::SMinus(edge) => write!(f, "S-_{edge}"),
        }
    }
}

/// Column and row indexing shared by the LP and the tableau.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpLayout {
    pub num_nodes: usize,
    pub num_edges: usize,
}

impl LpLayout {
    pub fn num_rows(&self) -> usize {
        2 * self.num_edges
    }

    pub fn num_cols(&self) -> usize {
        2 * (self.num_nodes - 1) + 3 * self.num_edges
    }

    /// Column of `x+_node`, `None` for the gauge node.
    pub fn x_plus_col(&self, node: usize) -> Option<usize> {
        (node > 1).then(|| node - 2)
    }

    /// Column of `x-_node`, `None` for the gauge node.
    pub fn x_minus_col(&self, node: usize) -> Option<usize> {
        (node > 1).then(|| (self.num_nodes - 1) + node - 2)
    }

    pub fn z_col(&self, edge_index: usize) -> usize {
        2 * (self.num_nodes - 1) + edge_index
    }

    pub fn s_plus_col(&self, edge_index: usize) -> usize {
        2 * (self.num_nodes - 1) + self.num_edges + edge_index
    }

    pub fn s_minus_col(&self, edge_index: usize) -> usize {
        2 * (self.num_nodes - 1) + 2 * self.num_edges + edge_index
    }

    pub fn label(&self, col: usize) -> ColumnLabel {
        let nodes = self.num_nodes - 1;
        if col < nodes {
            ColumnLabel::XPlus(col + 2)
        } else if col < 2 * nodes {
            ColumnLabel::XMinus(col - nodes + 2)
        } else if col < 2 * nodes + self.num_edges {
            ColumnLabel::Z(col - 2 * nodes + 1)
        } else if col < 2 * nodes + 2 * self.num_edges {
            ColumnLabel::SPlus(col - 2 * nodes - self.num_edges + 1)
        } else {
            ColumnLabel::SMinus(col - 2 * nodes - 2 * self.num_edges + 1)
        }
    }
}

/// A standard-form LP `min c q` subject to `A q = b`, `q >= 0`.
#[derive(Debug, Clone)]
pub struct StandardLp {
    pub layout: LpLayout,
    pub cost: Vec<Rat>,
    pub matrix: Vec<Vec<Rat>>,
    pub rhs: Vec<Rat>,
}

/// Assembles the LP of a one-dimensional instance.
pub fn build_lp(inst: &ProblemInstance) -> StandardLp {
    assert_eq!(inst.dim(), 1, "build_lp needs a one-dimensional instance");
    let layout = LpLayout {
        num_nodes: inst.graph().num_nodes(),
        num_edges: inst.graph().num_edges(),
    };
    let m = layout.num_edges;

    let mut cost = vec![Rat::zero(); layout.num_cols()];
    for e in 0..m {
        cost[layout.z_col(e)] = Rat::one();
    }

    let mut matrix = vec![vec![Rat::zero(); layout.num_cols()]; layout.num_rows()];
    let mut rhs = vec![Rat::zero(); layout.num_rows()];
    for (e, edge) in inst.graph().edges().iter().enumerate() {
        let forward = &mut matrix[e];
        if let Some(c) = layout.x_plus_col(edge.j) {
            forward[c] = Rat::one();
        }
        if let Some(c) = layout.x_minus_col(edge.j) {
            forward[c] = -Rat::one();
        }
        if let Some(c) = layout.x_plus_col(edge.i) {
            forward[c] = -Rat::one();
        }
        if let Some(c) = layout.x_minus_col(edge.i) {
            forward[c] = Rat::one();
        }
        forward[layout.z_col(e)] = -Rat::one();
        forward[layout.s_plus_col(e)] = Rat::one();
        rhs[e] = inst.epsilon_1d(e).clone();

        let reversed = &mut matrix[m + e];
        if let Some(c) = layout.x_plus_col(edge.j) {
            reversed[c] = -Rat::one();
        }
        if let Some(c) = layout.x_minus_col(edge.j) {
            reversed[c] = Rat::one();
        }
        if let Some(c) = layout.x_plus_col(edge.i) {
            reversed[c] = Rat::one();
        }
        if let Some(c) = layout.x_minus_col(edge.i) {
            reversed[c] = -Rat::one();
        }
        reversed[layout.z_col(e)] = -Rat::one();
        reversed[layout.s_minus_col(e)] = Rat::one();
        rhs[m + e] = -inst.epsilon_1d(e).clone();
    }

    StandardLp {
        layout,
        cost,
        matrix,
        rhs,
    }
}
