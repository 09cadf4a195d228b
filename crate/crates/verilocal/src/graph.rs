//! Oriented measurement graphs and their validation.
//!
//! Node ids are 1-based; node 1 is the gauge node pinned to the origin.
//! Edges are ordered pairs, so `(i, j)` and `(j, i)` are distinct
//! measurements and may coexist, while repeating the same ordered pair is
//! rejected.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// A directed measurement edge between two (1-based) node ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
}

impl Edge {
    pub fn new(i: usize, j: usize) -> Self {
        Edge { i, j }
    }

    /// The same measurement stored with swapped endpoints.
    pub fn reversed(self) -> Self {
        Edge {
            i: self.j,
            j: self.i,
        }
    }
}

impl From<(usize, usize)> for Edge {
    fn from((i, j): (usize, usize)) -> Self {
        Edge::new(i, j)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    NoNodes,
    #[error("edge e{index} references node {id}, valid ids are 1..={num_nodes}")]
    BadNodeId {
        index: usize,
        id: usize,
        num_nodes: usize,
    },
    #[error("edge e{index} is a self loop at node {node}")]
    SelfLoop { index: usize, node: usize },
    #[error("duplicate edge ({i},{j})")]
    DuplicateEdge { i: usize, j: usize },
    #[error("graph is disconnected: components {}", format_components(.components))]
    Disconnected { components: Vec<Vec<usize>> },
}

fn format_components(components: &[Vec<usize>]) -> String {
    let parts: Vec<String> = components
        .iter()
        .map(|c| {
            let ids: Vec<String> = c.iter().map(|n| n.to_string()).collect();
            format!("{{{}}}", ids.join(","))
        })
        .collect();
    parts.join(" ")
}

/// A connected oriented graph of pairwise relative measurements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementGraph {
    num_nodes: usize,
    edges: Vec<Edge>,
}

impl MeasurementGraph {
    /// Builds and validates a graph. Connectivity is checked on the
    /// undirected skeleton.
    pub fn new<E, I>(num_nodes: usize, edges: I) -> Result<Self, GraphError>
    where
        E: Into<Edge>,
        I: IntoIterator<Item = E>,
    {
        let edges: Vec<Edge> = edges.into_iter().map(Into::into).collect();
        if num_nodes == 0 {
            return Err(GraphError::NoNodes);
        }
        let mut seen = HashSet::new();
        for (idx, edge) in edges.iter().enumerate() {
            for id in [edge.i, edge.j] {
                if id == 0 || id > num_nodes {
                    return Err(GraphError::BadNodeId {
                        index: idx + 1,
                        id,
                        num_nodes,
                    });
                }
            }
            if edge.i == edge.j {
                return Err(GraphError::SelfLoop {
                    index: idx + 1,
                    node: edge.i,
                });
            }
            if !seen.insert((edge.i, edge.j)) {
                return Err(GraphError::DuplicateEdge {
                    i: edge.i,
                    j: edge.j,
                });
            }
        }
        let components = undirected_components(num_nodes, edges.iter().copied());
        if components.len() > 1 {
            return Err(GraphError::Disconnected { components });
        }
        Ok(MeasurementGraph { num_nodes, edges })
    }

    /// Complete graph on `n` nodes with one edge per unordered pair, ordered
    /// `i < j`.
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                edges.push(Edge::new(i, j));
            }
        }
        MeasurementGraph::new(n, edges).expect("complete graph is valid")
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> Edge {
        self.edges[index]
    }

    /// A copy with one edge direction flipped. Fails if the flip collides
    /// with an existing ordered pair.
    pub fn with_edge_reversed(&self, index: usize) -> Result<Self, GraphError> {
        let mut edges = self.edges.clone();
        edges[index] = edges[index].reversed();
        MeasurementGraph::new(self.num_nodes, edges)
    }

    /// Connected components of the subgraph induced by the kept nodes.
    /// `keep[id - 1]` marks node `id` as kept. Components are sorted by
    /// their smallest node id.
    pub fn induced_components(&self, keep: &[bool]) -> Vec<Vec<usize>> {
        assert_eq!(keep.len(), self.num_nodes);
        let kept_edges = self
            .edges
            .iter()
            .copied()
            .filter(|e| keep[e.i - 1] && keep[e.j - 1]);
        let mut components = undirected_components(self.num_nodes, kept_edges);
        components.retain(|c| c.iter().all(|&n| keep[n - 1]));
        components
    }

    /// Indices of edges whose endpoints both lie in the given node set.
    pub fn induced_edge_indices(&self, nodes: &[usize]) -> Vec<usize> {
        let member: HashSet<usize> = nodes.iter().copied().collect();
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| member.contains(&e.i) && member.contains(&e.j))
            .map(|(k, _)| k)
            .collect()
    }
}

/// Connected components of an undirected node/edge set, each sorted, the
/// list sorted by smallest member.
fn undirected_components<I>(num_nodes: usize, edges: I) -> Vec<Vec<usize>>
where
    I: IntoIterator<Item = Edge>,
{
    let mut parent: Vec<usize> = (0..num_nodes).collect();
    fn find(parent: &mut Vec<usize>, mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for edge in edges {
        let (a, b) = (
            find(&mut parent, edge.i - 1),
            find(&mut parent, edge.j - 1),
        );
        if a != b {
            parent[a] = b;
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
    for node in 0..num_nodes {
        let root = find(&mut parent, node);
        groups[root].push(node + 1);
    }
    let mut components: Vec<Vec<usize>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
    components.sort_by_key(|c| c[0]);
    components
}
