//! Linkage graphs, series-parallel decomposition and the combinatorics of a
//! distinguished cycle with attached components.

mod decompose;
mod sp;

pub use decompose::{
    elementary_cycles, relative_decomposition, AttachedComponent, Cell, RelativeDecomposition,
    Segment, SegmentKind,
};
pub use sp::{is_partial_two_tree, sp_decompose, NotSeriesParallel, SPNode, SPTree};

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(String),
    #[error("edge {u}-{v} has non-positive length {len}")]
    BadLength { u: String, v: String, len: f64 },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has no vertices")]
    Empty,
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("not a partial two-tree: {0}")]
    NotPtt(String),
    #[error("diagonals {0:?} and {1:?} cross")]
    CrossingDiagonals((String, String), (String, String)),
    #[error("diagonal {0:?} is not a pair of distinct cycle vertices")]
    BadDiagonal((String, String)),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: String,
    pub v: String,
    #[serde(rename = "len")]
    pub length: f64,
}

/// Undirected multigraph with positive edge lengths.
///
/// Vertex ids are opaque strings; internally every vertex also has a dense
/// index given by its position in `vertices`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkageGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    index: BTreeMap<String, usize>,
}

impl LinkageGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let g = Self::new_unchecked_connectivity(vertices, edges)?;
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// Like [`LinkageGraph::new`] but allows disconnected graphs. Used for
    /// intermediate subgraphs during decomposition.
    pub(crate) fn new_unchecked_connectivity(
        vertices: Vec<String>,
        edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        for e in &edges {
            for end in [&e.u, &e.v] {
                if !index.contains_key(end) {
                    return Err(GraphError::UnknownVertex(end.clone()));
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.u.clone()));
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(GraphError::BadLength {
                    u: e.u.clone(),
                    v: e.v.clone(),
                    len: e.length,
                });
            }
        }
        Ok(Self {
            vertices,
            edges,
            index,
        })
    }

    /// Builds a graph from `(u, v, length)` triples; vertices are collected in
    /// first-appearance order.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S, f64)]) -> Result<Self, GraphError> {
        let mut vertices: Vec<String> = Vec::new();
        let mut seen = BTreeSet::new();
        let mut list = Vec::with_capacity(edges.len());
        for (u, v, l) in edges {
            for w in [u.as_ref(), v.as_ref()] {
                if seen.insert(w.to_string()) {
                    vertices.push(w.to_string());
                }
            }
            list.push(Edge {
                u: u.as_ref().to_string(),
                v: v.as_ref().to_string(),
                length: *l,
            });
        }
        Self::new(vertices, list)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, v: &str) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn has_vertex(&self, v: &str) -> bool {
        self.index.contains_key(v)
    }

    /// Edge endpoints as dense vertex indices.
    pub fn edge_ends(&self, e: usize) -> (usize, usize) {
        let edge = &self.edges[e];
        (self.index[&edge.u], self.index[&edge.v])
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Incident edge indices per vertex index.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for e in 0..self.edges.len() {
            let (u, v) = self.edge_ends(e);
            inc[u].push(e);
            inc[v].push(e);
        }
        inc
    }

    /// First edge joining `u` and `v` (either direction).
    pub fn find_edge(&self, u: &str, v: &str) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| (e.u == u && e.v == v) || (e.u == v && e.v == u))
    }

    pub fn is_connected(&self) -> bool {
        let inc = self.incidence();
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &e in &inc[x] {
                let (a, b) = self.edge_ends(e);
                let y = if a == x { b } else { a };
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Returns a copy with one edge length replaced.
    pub fn with_length(&self, e: usize, length: f64) -> Result<Self, GraphError> {
        let mut edges = self.edges.clone();
        edges[e].length = length;
        Self::new(self.vertices.clone(), edges)
    }

    /// Simple cycles, each as a list of edge indices in traversal order.
    ///
    /// Exponential in general; meant for the small graphs this crate targets.
    pub fn simple_cycles(&self) -> Vec<Vec<usize>> {
        let inc = self.incidence();
        let n = self.vertices.len();
        let mut out = Vec::new();
        // Each cycle is reported from its smallest vertex, once per direction;
        // the direction is fixed by requiring first edge < last edge.
        for start in 0..n {
            let mut on_path = vec![false; n];
            on_path[start] = true;
            let mut path_edges = Vec::new();
            self.cycle_dfs(start, start, &inc, &mut on_path, &mut path_edges, &mut out);
        }
        out
    }

    fn cycle_dfs(
        &self,
        start: usize,
        at: usize,
        inc: &[Vec<usize>],
        on_path: &mut [bool],
        path_edges: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for &e in &inc[at] {
            if path_edges.last() == Some(&e) {
                continue;
            }
            let (a, b) = self.edge_ends(e);
            let next = if a == at { b } else { a };
            if next == start {
                let first = path_edges.first().copied().unwrap_or(e);
                // two-edge cycles of parallel edges count once
                if path_edges.is_empty() {
                    continue;
                }
                if first < e {
                    let mut cyc = path_edges.clone();
                    cyc.push(e);
                    out.push(cyc);
                }
                continue;
            }
            if next < start || on_path[next] {
                continue;
            }
            on_path[next] = true;
            path_edges.push(e);
            self.cycle_dfs(start, next, inc, on_path, path_edges, out);
            path_edges.pop();
            on_path[next] = false;
        }
    }
}

/// An oriented cycle of the graph without repeated vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistinguishedCycle(Vec<String>);

impl DistinguishedCycle {
    pub fn new(g: &LinkageGraph, vertices: Vec<String>) -> Result<Self, GraphError> {
        if vertices.len() < 3 {
            return Err(GraphError::InvalidCycle(format!(
                "needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !g.has_vertex(v) {
                return Err(GraphError::UnknownVertex(v.clone()));
            }
            if !seen.insert(v) {
                return Err(GraphError::InvalidCycle(format!("vertex {v} repeats")));
            }
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
            if g.find_edge(a, b).is_none() {
                return Err(GraphError::InvalidCycle(format!("no edge {a}-{b}")));
            }
        }
        Ok(Self(vertices))
    }

    pub fn vertices(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.0.clone();
        v.reverse();
        Self(v)
    }

    /// Edge index used for each cycle step `vertices[i] -> vertices[i+1]`.
    ///
    /// When parallel edges join consecutive cycle vertices the first one is
    /// taken as the cycle edge.
    pub fn edge_indices(&self, g: &LinkageGraph) -> Vec<usize> {
        let n = self.0.len();
        (0..n)
            .map(|i| {
                g.find_edge(&self.0[i], &self.0[(i + 1) % n])
                    .expect("cycle validated against graph")
            })
            .collect()
    }

    pub fn position(&self, v: &str) -> Option<usize> {
        self.0.iter().position(|x| x == v)
    }
}

/// A linkage together with its optional distinguished cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Linkage {
    pub graph: LinkageGraph,
    pub gamma: Option<DistinguishedCycle>,
    pub terminals: Option<(String, String)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TerminalsFile {
    #[serde(rename = "I")]
    i: String,
    #[serde(rename = "T")]
    t: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkageFile {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terminals: Option<TerminalsFile>,
}

#[derive(Debug, Error)]
pub enum LinkageFileError {
    #[error("cannot read linkage file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed linkage JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl Linkage {
    pub fn new(graph: LinkageGraph, gamma: Option<Vec<String>>) -> Result<Self, GraphError> {
        let gamma = gamma
            .map(|c| DistinguishedCycle::new(&graph, c))
            .transpose()?;
        Ok(Self {
            graph,
            gamma,
            terminals: None,
        })
    }

    /// Polygonal linkage `v0 v1 ... v(n-1)` with Γ the polygon itself.
    pub fn polygon(lengths: &[f64]) -> Result<Self, GraphError> {
        let n = lengths.len();
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let edges: Vec<(String, String, f64)> = (0..n)
            .map(|i| (names[i].clone(), names[(i + 1) % n].clone(), lengths[i]))
            .collect();
        let g = LinkageGraph::from_edges(&edges)?;
        Self::new(g, Some(names))
    }

    /// Three-chain `[p,q;r]`: chains A, B, Z from `I` to `T`, with Γ = A
    /// followed by B reversed. Interior vertices are named `A1.., B1.., Z1..`
    /// counted from `I`.
    pub fn three_chain(a: &[f64], b: &[f64], z: &[f64]) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut chain = |prefix: &str, lens: &[f64]| -> Vec<String> {
            let mut names = vec!["I".to_string()];
            for k in 1..lens.len() {
                names.push(format!("{prefix}{k}"));
            }
            names.push("T".to_string());
            for (k, &l) in lens.iter().enumerate() {
                edges.push((names[k].clone(), names[k + 1].clone(), l));
            }
            names
        };
        let an = chain("A", a);
        let bn = chain("B", b);
        chain("Z", z);
        let g = LinkageGraph::from_edges(&edges)?;
        // gamma = I, A1.., T, B(q-1).., B1
        let mut gamma: Vec<String> = an;
        gamma.extend(bn[1..bn.len() - 1].iter().rev().cloned());
        let mut linkage = Self::new(g, Some(gamma))?;
        linkage.terminals = Some(("I".into(), "T".into()));
        Ok(linkage)
    }

    pub fn from_json_str(s: &str) -> Result<Self, LinkageFileError> {
        let file: LinkageFile = serde_json::from_str(s)?;
        let graph = LinkageGraph::new(file.vertices, file.edges)?;
        let mut linkage = Self::new(graph, file.gamma)?;
        if let Some(t) = file.terminals {
            for v in [&t.i, &t.t] {
                if !linkage.graph.has_vertex(v) {
                    return Err(GraphError::UnknownVertex(v.clone()).into());
                }
            }
            linkage.terminals = Some((t.i, t.t));
        }
        Ok(linkage)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, LinkageFileError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let file = LinkageFile {
            vertices: self.graph.vertices.clone(),
            edges: self.graph.edges.clone(),
            gamma: self.gamma.as_ref().map(|g| g.0.clone()),
            terminals: self.terminals.as_ref().map(|(i, t)| TerminalsFile {
                i: i.clone(),
                t: t.clone(),
            }),
        };
        serde_json::to_string_pretty(&file).expect("linkage serializes")
    }

    pub fn with_length(&self, e: usize, length: f64) -> Result<Self, GraphError> {
        Ok(Self {
            graph: self.graph.with_length(e, length)?,
            gamma: self.gamma.clone(),
            terminals: self.terminals.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_graphs() {
        assert!(matches!(
            LinkageGraph::from_edges(&[("a", "a", 1.0)]),
            Err(GraphError::SelfLoop(_))
        ));
        assert!(matches!(
            LinkageGraph::from_edges(&[("a", "b", 0.0)]),
            Err(GraphError::BadLength { .. })
        ));
        assert!(matches!(
            LinkageGraph::from_edges(&[("a", "b", 1.0), ("c", "d", 1.0)]),
            Err(GraphError::Disconnected)
        ));
        // parallel edges are fine
        assert!(LinkageGraph::from_edges(&[("a", "b", 1.0), ("a", "b", 2.0)]).is_ok());
    }

    #[test]
    fn three_chain_layout() {
        let l = Linkage::three_chain(&[1.0, 1.1], &[1.2, 0.9], &[1.0, 0.8]).unwrap();
        assert_eq!(l.graph.vertex_count(), 5);
        assert_eq!(l.graph.edge_count(), 6);
        assert_eq!(l.gamma.unwrap().vertices(), &["I", "A1", "T", "B1"]);
        let l = Linkage::three_chain(&[1.0, 1.1, 1.0], &[1.2, 0.9, 0.7], &[1.0]).unwrap();
        assert_eq!(
            l.gamma.unwrap().vertices(),
            &["I", "A1", "A2", "T", "B2", "B1"]
        );
    }

    #[test]
    fn cycle_validation() {
        let l = Linkage::polygon(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        let g = &l.graph;
        assert!(DistinguishedCycle::new(g, vec!["v0".into(), "v1".into()]).is_err());
        assert!(DistinguishedCycle::new(
            g,
            vec!["v0".into(), "v2".into(), "v1".into(), "v3".into()]
        )
        .is_err());
    }

    #[test]
    fn simple_cycles_of_three_chain() {
        let l = Linkage::three_chain(&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(l.graph.simple_cycles().len(), 3);
        let tri = Linkage::polygon(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(tri.graph.simple_cycles().len(), 1);
        let dig = LinkageGraph::from_edges(&[("a", "b", 1.0), ("a", "b", 2.0)]).unwrap();
        assert_eq!(dig.simple_cycles().len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let l = Linkage::three_chain(&[1.0, 1.5], &[1.25, 0.5], &[2.0, 0.75]).unwrap();
        let back = Linkage::from_json_str(&l.to_json_string()).unwrap();
        assert_eq!(l, back);
        assert!(matches!(
            Linkage::from_json_str("{\"vertices\": ["),
            Err(LinkageFileError::Json(_))
        ));
    }
}
