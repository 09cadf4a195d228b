//! File formats: graph/problem JSON, support JSON, and report payloads.
//!
//! Rationals travel as `"num/den"` strings, never as floats. Node ids and
//! edge numbers are 1-based in every file and report; the library's 0-based
//! edge indices are translated at this boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corners::{Component, ComponentReport, CornerSet};
use crate::graph::{GraphError, MeasurementGraph};
use crate::instance::{InstanceError, ProblemInstance};
use crate::outlier::{Sign, SignedOutlierSupport, SupportError};
use crate::pver::{PverPolynomial, SupportCensus};
use crate::rational::{format_rat, parse_rat, Rat};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rational(#[from] crate::rational::ParseRatError),
    #[error("unknown sign {0:?}, expected \"+\" or \"-\"")]
    BadSign(String),
}

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Support(#[from] SupportError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("support entry references edge {edge}, valid numbers are 1..={num_edges}")]
    SupportEdgeNumber { edge: usize, num_edges: usize },
}

/// Either stage of loading can fail; callers map the two stages to
/// different exit codes.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

impl From<serde_json::Error> for LoadError {
    fn from(e: serde_json::Error) -> Self {
        LoadError::Parse(ParseError::Json(e))
    }
}

impl From<GraphError> for LoadError {
    fn from(e: GraphError) -> Self {
        LoadError::Validation(ValidationError::Graph(e))
    }
}

impl From<InstanceError> for LoadError {
    fn from(e: InstanceError) -> Self {
        LoadError::Validation(ValidationError::Instance(e))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub num_nodes: usize,
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SupportEntry {
    /// 1-based edge number.
    pub edge: usize,
    pub sign: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SupportFile {
    pub support: Vec<SupportEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EpsilonFile {
    pub epsilon: Vec<Vec<String>>,
}

fn parse_epsilon(rows: &[Vec<String>]) -> Result<Vec<Vec<Rat>>, ParseError> {
    rows.iter()
        .map(|row| row.iter().map(|s| Ok(parse_rat(s)?)).collect())
        .collect()
}

/// Loads a graph file; when it embeds outlier values the instance comes
/// along.
pub fn load_graph(text: &str) -> Result<(MeasurementGraph, Option<ProblemInstance>), LoadError> {
    let file: GraphFile = serde_json::from_str(text)?;
    let graph = MeasurementGraph::new(file.num_nodes, file.edges.iter().map(|e| (e.i, e.j)))?;
    let instance = match &file.epsilon {
        Some(rows) => {
            let epsilon = parse_epsilon(rows).map_err(LoadError::Parse)?;
            Some(ProblemInstance::new(graph.clone(), epsilon)?)
        }
        None => None,
    };
    Ok((graph, instance))
}

/// Loads a signed support file against a known edge count.
pub fn load_support(text: &str, num_edges: usize) -> Result<SignedOutlierSupport, LoadError> {
    let file: SupportFile = serde_json::from_str(text)?;
    let mut entries = Vec::with_capacity(file.support.len());
    for entry in &file.support {
        let sign = match entry.sign.as_str() {
            "+" => Sign::Plus,
            "-" => Sign::Minus,
            other => return Err(ParseError::BadSign(other.to_owned()).into()),
        };
        if entry.edge == 0 || entry.edge > num_edges {
            return Err(ValidationError::SupportEdgeNumber {
                edge: entry.edge,
                num_edges,
            }
            .into());
        }
        entries.push((entry.edge - 1, sign));
    }
    SignedOutlierSupport::new(entries, num_edges)
        .map_err(|e| LoadError::Validation(ValidationError::Support(e)))
}

/// Loads a bare epsilon file for a known graph.
pub fn load_epsilon(text: &str, graph: &MeasurementGraph) -> Result<ProblemInstance, LoadError> {
    let file: EpsilonFile = serde_json::from_str(text)?;
    let epsilon = parse_epsilon(&file.epsilon).map_err(LoadError::Parse)?;
    Ok(ProblemInstance::new(graph.clone(), epsilon)?)
}

/// Serializes a graph (optionally with an instance's outlier values) in the
/// graph-file schema.
pub fn graph_to_json(graph: &MeasurementGraph, instance: Option<&ProblemInstance>) -> String {
    let file = GraphFile {
        num_nodes: graph.num_nodes(),
        edges: graph
            .edges()
            .iter()
            .map(|e| EdgeEntry { i: e.i, j: e.j })
            .collect(),
        epsilon: instance.map(|inst| {
            (0..graph.num_edges())
                .map(|e| inst.epsilon_row(e).iter().map(format_rat).collect())
                .collect()
        }),
    };
    serde_json::to_string_pretty(&file).expect("graph serializes")
}

/// Serializes a support in the support-file schema (1-based edges).
pub fn support_to_json(support: &SignedOutlierSupport) -> String {
    let file = SupportFile {
        support: support
            .iter()
            .map(|(edge, sign)| SupportEntry {
                edge: edge + 1,
                sign: sign.as_str().to_owned(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("support serializes")
}

/// One corner as a report value.
pub fn corner_json(x: &[Rat], edge_costs: &[Rat]) -> serde_json::Value {
    serde_json::json!({
        "x": x.iter().map(format_rat).collect::<Vec<_>>(),
        "edge_costs": edge_costs.iter().map(format_rat).collect::<Vec<_>>(),
    })
}

/// A 1-D corner set as a report value.
pub fn corner_set_json(set: &CornerSet) -> serde_json::Value {
    serde_json::json!({
        "classification": set.classification.as_str(),
        "optimal_cost": format_rat(&set.optimal_cost),
        "corners": set
            .corners
            .iter()
            .map(|c| corner_json(&c.x, &c.edge_costs))
            .collect::<Vec<_>>(),
    })
}

fn component_json(component: &Component) -> serde_json::Value {
    serde_json::json!({
        "nodes": component.nodes,
        "edges": component.edges.iter().map(|e| e + 1).collect::<Vec<_>>(),
    })
}

/// The corner report: classification, cost, corners, components.
pub fn corner_report_json(
    dims: &[CornerSet],
    classification: &str,
    combined_count: u128,
    components: &ComponentReport,
) -> serde_json::Value {
    let total_cost: Rat = dims.iter().map(|d| d.optimal_cost.clone()).sum();
    let mut report = serde_json::json!({
        "classification": classification,
        "optimal_cost": format_rat(&total_cost),
        "corners": dims[0]
            .corners
            .iter()
            .map(|c| corner_json(&c.x, &c.edge_costs))
            .collect::<Vec<_>>(),
        "components": components
            .components
            .iter()
            .map(|c| c.nodes.clone())
            .collect::<Vec<_>>(),
        "component_edges": components
            .components
            .iter()
            .map(component_json)
            .collect::<Vec<_>>(),
        "combined_corner_count": combined_count.to_string(),
    });
    if dims.len() > 1 {
        report["dimensions"] = serde_json::Value::Array(
            dims.iter().map(corner_set_json).collect::<Vec<_>>(),
        );
    }
    report
}

/// Census rows as a report value, mirroring the CSV columns.
pub fn census_json(census: &SupportCensus) -> serde_json::Value {
    serde_json::Value::Array(
        census
            .rows
            .iter()
            .map(|row| {
                serde_json::json!({
                    "k": row.outlier_count,
                    "total": row.total,
                    "verifiable": row.verifiable,
                    "uniquely_verifiable": row.uniquely_verifiable,
                })
            })
            .collect(),
    )
}

/// Polynomial coefficients as `{"coeffs": [...]}`.
pub fn polynomial_json(polynomial: &PverPolynomial) -> serde_json::Value {
    serde_json::json!({ "coeffs": polynomial.coefficients })
}
