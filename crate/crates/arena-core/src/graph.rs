//! Graph representation and bounded simple-path enumeration.
//!
//! Graphs are immutable after construction: a node count plus a dense,
//! stable list of edges (edge id = position in the list). Undirected by
//! default; a directed flag restricts walks to the stored orientation.

use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;

/// Default ceiling on the number of paths a single enumeration may
/// produce before it is declared too large.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {index} endpoint {node} out of range (nodes={nodes})")]
    EndpointOutOfRange { index: usize, node: NodeId, nodes: usize },
    #[error("edge {index} is a self-loop on node {node}")]
    SelfLoop { index: usize, node: NodeId },
    #[error("edge {index} duplicates edge {first} ({a}, {b})")]
    DuplicateEdge { index: usize, first: usize, a: NodeId, b: NodeId },
    #[error("path enumeration between {from} and {to} exceeded cap of {cap} paths")]
    TooManyPaths { from: NodeId, to: NodeId, cap: usize },
    #[error("path enumeration requires distinct endpoints (got {node} twice)")]
    SameEndpoints { node: NodeId },
    #[error("path enumeration requires max_len >= 1")]
    ZeroMaxLen,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(NodeId, NodeId)>,
    directed: bool,
    /// Per node: (neighbor, edge id), sorted by edge id.
    incidence: Vec<Vec<(NodeId, EdgeId)>>,
}

impl Graph {
    /// Builds a graph, rejecting out-of-range endpoints, self-loops and
    /// duplicate edges (for undirected graphs, `(a, b)` equals `(b, a)`).
    pub fn new(
        node_count: usize,
        edges: Vec<(NodeId, NodeId)>,
        directed: bool,
    ) -> Result<Self, GraphError> {
        let mut seen: std::collections::HashMap<(NodeId, NodeId), usize> =
            std::collections::HashMap::new();
        for (index, &(a, b)) in edges.iter().enumerate() {
            if a >= node_count {
                return Err(GraphError::EndpointOutOfRange { index, node: a, nodes: node_count });
            }
            if b >= node_count {
                return Err(GraphError::EndpointOutOfRange { index, node: b, nodes: node_count });
            }
            if a == b {
                return Err(GraphError::SelfLoop { index, node: a });
            }
            let key = if directed || a < b { (a, b) } else { (b, a) };
            if let Some(&first) = seen.get(&key) {
                return Err(GraphError::DuplicateEdge { index, first, a, b });
            }
            seen.insert(key, index);
        }
        let mut incidence = vec![Vec::new(); node_count];
        for (id, &(a, b)) in edges.iter().enumerate() {
            incidence[a].push((b, id));
            if !directed {
                incidence[b].push((a, id));
            }
        }
        // edge insertion order is id order, so each list is already
        // sorted by edge id
        Ok(Graph { node_count, edges, directed, incidence })
    }

    pub fn undirected(node_count: usize, edges: Vec<(NodeId, NodeId)>) -> Result<Self, GraphError> {
        Self::new(node_count, edges, false)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn endpoints(&self, edge: EdgeId) -> Option<(NodeId, NodeId)> {
        self.edges.get(edge).copied()
    }

    fn incident(&self, node: NodeId) -> &[(NodeId, EdgeId)] {
        &self.incidence[node]
    }
}

/// A walk given as an edge-id sequence with declared endpoints. For
/// undirected graphs the orientation of each edge is resolved while
/// walking.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub edges: Vec<EdgeId>,
    pub source: NodeId,
    pub target: NodeId,
}

impl Path {
    pub fn new(edges: Vec<EdgeId>, source: NodeId, target: NodeId) -> Self {
        Path { edges, source, target }
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// True iff `path` is a node-simple walk in `g` from its source to its
/// target. Empty paths and walks that revisit any node (including the
/// source) are rejected.
pub fn validate_path(g: &Graph, path: &Path) -> bool {
    if path.edges.is_empty() || path.source == path.target {
        return false;
    }
    if path.source >= g.node_count() || path.target >= g.node_count() {
        return false;
    }
    let mut visited = vec![false; g.node_count()];
    visited[path.source] = true;
    let mut current = path.source;
    for &edge in &path.edges {
        let Some((a, b)) = g.endpoints(edge) else {
            return false;
        };
        let next = if a == current {
            b
        } else if b == current && !g.is_directed() {
            a
        } else {
            return false;
        };
        if visited[next] {
            return false;
        }
        visited[next] = true;
        current = next;
    }
    current == path.target
}

/// Enumerates every node-simple path from `source` to `target` with at
/// most `max_len` edges, using the default result cap.
pub fn enumerate_simple_paths(
    g: &Graph,
    source: NodeId,
    target: NodeId,
    max_len: usize,
) -> Result<Vec<Path>, GraphError> {
    enumerate_simple_paths_capped(g, source, target, max_len, DEFAULT_PATH_CAP)
}

/// Like [`enumerate_simple_paths`] with an explicit cap on the number of
/// results. Output order is shortest-first, ties broken lexicographically
/// by edge-id sequence, and is identical across calls.
pub fn enumerate_simple_paths_capped(
    g: &Graph,
    source: NodeId,
    target: NodeId,
    max_len: usize,
    cap: usize,
) -> Result<Vec<Path>, GraphError> {
    if source == target {
        return Err(GraphError::SameEndpoints { node: source });
    }
    if max_len == 0 {
        return Err(GraphError::ZeroMaxLen);
    }
    if source >= g.node_count() || target >= g.node_count() {
        return Ok(Vec::new());
    }

    let mut results: Vec<Path> = Vec::new();
    let mut visited = vec![false; g.node_count()];
    visited[source] = true;
    // stack of (node we are at, index into its incidence list)
    let mut stack: Vec<(NodeId, usize)> = vec![(source, 0)];
    let mut path_edges: Vec<EdgeId> = Vec::new();

    while let Some(&mut (node, ref mut cursor)) = stack.last_mut() {
        let incident = g.incident(node);
        if *cursor >= incident.len() {
            stack.pop();
            if let Some(_edge) = path_edges.pop() {
                visited[node] = false;
            }
            continue;
        }
        let (next, edge) = incident[*cursor];
        *cursor += 1;
        if next == target {
            if path_edges.len() < max_len {
                if results.len() >= cap {
                    return Err(GraphError::TooManyPaths { from: source, to: target, cap });
                }
                let mut edges = path_edges.clone();
                edges.push(edge);
                results.push(Path::new(edges, source, target));
            }
            continue;
        }
        if !visited[next] && path_edges.len() + 1 < max_len {
            visited[next] = true;
            path_edges.push(edge);
            stack.push((next, 0));
        }
    }

    // DFS above yields plain lexicographic order; the public contract is
    // shortest-first with lexicographic tie-breaking, so finish with a
    // stable sort on length.
    results.sort_by_key(|p| p.len());
    Ok(results)
}
