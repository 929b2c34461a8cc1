//! Undirected simple graphs and the stabilizer generators of their graph states.
//!
//! Vertices are 1-indexed throughout so that vertex `i` is party `i` of the
//! Bell scenario. Every [`Graph`] is connected, loop-free and has no
//! duplicate edges; constructors and the parser reject anything else.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("malformed graph description: {0}")]
    Malformed(String),
    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("vertex count {n} outside supported range {min}..")]
    TooFewVertices { n: usize, min: usize },
}

/// A connected, undirected simple graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    // adjacency[i - 1] is the sorted neighbourhood of vertex i
    adjacency: Vec<BTreeSet<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list, validating every invariant.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::TooFewVertices { n, min: 1 });
        }
        let mut adjacency = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            for v in [a, b] {
                if v == 0 || v > n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !adjacency[a - 1].insert(b) {
                return Err(GraphError::DuplicateEdge(a.min(b), a.max(b)));
            }
            adjacency[b - 1].insert(a);
        }
        let graph = Graph { n, adjacency };
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    /// Star graph with the hub at vertex 1.
    pub fn star(n: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewVertices { n, min: 2 });
        }
        let edges: Vec<_> = (2..=n).map(|i| (1, i)).collect();
        Graph::new(n, &edges)
    }

    /// Cycle 1-2-...-n-1.
    pub fn ring(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::TooFewVertices { n, min: 3 });
        }
        let edges: Vec<_> = (1..=n).map(|i| (i, i % n + 1)).collect();
        Graph::new(n, &edges)
    }

    /// Path 1-2-...-n.
    pub fn line(n: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewVertices { n, min: 2 });
        }
        let edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        Graph::new(n, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (idx, nbrs) in self.adjacency.iter().enumerate() {
            let i = idx + 1;
            out.extend(nbrs.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    pub fn neighborhood(&self, vertex: usize) -> Result<&BTreeSet<usize>, GraphError> {
        if vertex == 0 || vertex > self.n {
            return Err(GraphError::VertexOutOfRange { vertex, n: self.n });
        }
        Ok(&self.adjacency[vertex - 1])
    }

    pub fn degree(&self, vertex: usize) -> Result<usize, GraphError> {
        self.neighborhood(vertex).map(BTreeSet::len)
    }

    /// Largest neighbourhood size over all vertices.
    pub fn n_max(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Lowest-indexed vertex whose degree equals [`Graph::n_max`].
    pub fn max_degree_vertex(&self) -> usize {
        let n_max = self.n_max();
        self.adjacency
            .iter()
            .position(|nb| nb.len() == n_max)
            .map_or(1, |idx| idx + 1)
    }

    /// Generator `i` is `X` on vertex `i` and `Z` on each neighbour, sign +1.
    pub fn stabilizers(&self) -> Vec<StabilizerGenerator> {
        (1..=self.n)
            .map(|i| {
                let mut letters = vec![Pauli::I; self.n];
                letters[i - 1] = Pauli::X;
                for &j in &self.adjacency[i - 1] {
                    letters[j - 1] = Pauli::Z;
                }
                StabilizerGenerator {
                    pauli: PauliString::new(letters),
                    sign: 1,
                }
            })
            .collect()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![1usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v - 1] {
                if !seen[w - 1] {
                    seen[w - 1] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Parses either the edge-list text form `"<N>; i-j i-j ..."` or the
    /// JSON form `{"n": N, "edges": [[i, j], ...]}`.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let trimmed = text.trim();
        if trimmed.starts_with('{') {
            let raw: GraphJson =
                serde_json::from_str(trimmed).map_err(|e| GraphError::Malformed(e.to_string()))?;
            let edges: Vec<_> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
            return Graph::new(raw.n, &edges);
        }
        let (head, tail) = trimmed
            .split_once(';')
            .ok_or_else(|| GraphError::Malformed("missing ';' after vertex count".into()))?;
        let n = parse_vertex(head.trim())?;
        let mut edges = Vec::new();
        for token in tail.split_whitespace() {
            let (a, b) = token
                .split_once('-')
                .ok_or_else(|| GraphError::Malformed(format!("edge token {token:?}")))?;
            edges.push((parse_vertex(a)?, parse_vertex(b)?));
        }
        Graph::new(n, &edges)
    }

    /// Canonical text form accepted by [`Graph::parse`].
    pub fn to_text(&self) -> String {
        let edges: Vec<String> = self
            .edges()
            .iter()
            .map(|(i, j)| format!("{i}-{j}"))
            .collect();
        format!("{}; {}", self.n, edges.join(" "))
    }
}

fn parse_vertex(s: &str) -> Result<usize, GraphError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(GraphError::Malformed(format!(
            "expected vertex number, found {s:?}"
        )));
    }
    s.parse()
        .map_err(|_| GraphError::Malformed(format!("vertex number {s:?} too large")))
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Graph::parse(s)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GraphJson {
            n: self.n,
            edges: self.edges().into_iter().map(|(a, b)| [a, b]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = GraphJson::deserialize(deserializer)?;
        let edges: Vec<_> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::new(raw.n, &edges).map_err(serde::de::Error::custom)
    }
}

/// A signed Pauli string stabilizing a target state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerGenerator {
    pub pauli: PauliString,
    pub sign: i8,
}

impl StabilizerGenerator {
    pub fn new(pauli: PauliString, sign: i8) -> Self {
        StabilizerGenerator { pauli, sign }
    }
}

impl FromStr for StabilizerGenerator {
    type Err = crate::pauli::PauliParseError;

    /// Accepts an optional leading `+` or `-` followed by `I/X/Y/Z` letters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sign, body) = match s.as_bytes().first() {
            Some(b'-') => (-1, &s[1..]),
            Some(b'+') => (1, &s[1..]),
            _ => (1, s),
        };
        Ok(StabilizerGenerator {
            pauli: body.parse()?,
            sign,
        })
    }
}

impl fmt::Display for StabilizerGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign < 0 {
            f.write_str("-")?;
        }
        write!(f, "{}", self.pauli)
    }
}
