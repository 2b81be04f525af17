use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Edge, LinkageGraph};

/// Node of a series-parallel decomposition tree.
///
/// Every node is oriented from a source terminal to a sink terminal. Leaves
/// carry the original edge index and its endpoints in that orientation;
/// series children are listed from source to sink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum SPNode {
    #[serde(rename = "E")]
    Edge { u: String, v: String, edge: usize },
    #[serde(rename = "S")]
    Series { children: Vec<SPNode> },
    #[serde(rename = "P")]
    Parallel { children: Vec<SPNode> },
}

impl SPNode {
    fn reversed(self) -> Self {
        match self {
            SPNode::Edge { u, v, edge } => SPNode::Edge { u: v, v: u, edge },
            SPNode::Series { children } => SPNode::Series {
                children: children.into_iter().rev().map(SPNode::reversed).collect(),
            },
            SPNode::Parallel { children } => SPNode::Parallel {
                children: children.into_iter().map(SPNode::reversed).collect(),
            },
        }
    }

    fn series(a: SPNode, b: SPNode) -> Self {
        let mut children = Vec::new();
        for part in [a, b] {
            match part {
                SPNode::Series { children: c } => children.extend(c),
                other => children.push(other),
            }
        }
        SPNode::Series { children }
    }

    fn parallel(a: SPNode, b: SPNode) -> Self {
        let mut children = Vec::new();
        for part in [a, b] {
            match part {
                SPNode::Parallel { children: c } => children.extend(c),
                other => children.push(other),
            }
        }
        SPNode::Parallel { children }
    }

    /// Number of leaves.
    pub fn edge_count(&self) -> usize {
        match self {
            SPNode::Edge { .. } => 1,
            SPNode::Series { children } | SPNode::Parallel { children } => {
                children.iter().map(SPNode::edge_count).sum()
            }
        }
    }

    fn check_arity(&self) -> bool {
        match self {
            SPNode::Edge { .. } => true,
            SPNode::Series { children } | SPNode::Parallel { children } => {
                children.len() >= 2 && children.iter().all(SPNode::check_arity)
            }
        }
    }

    fn evaluate_into(
        &self,
        source: usize,
        sink: usize,
        next: &mut usize,
        out: &mut Vec<(usize, usize, usize, String, String)>,
    ) {
        match self {
            SPNode::Edge { u, v, edge } => out.push((source, sink, *edge, u.clone(), v.clone())),
            SPNode::Parallel { children } => {
                for c in children {
                    c.evaluate_into(source, sink, next, out);
                }
            }
            SPNode::Series { children } => {
                let mut from = source;
                for (k, c) in children.iter().enumerate() {
                    let to = if k + 1 == children.len() {
                        sink
                    } else {
                        *next += 1;
                        *next - 1
                    };
                    c.evaluate_into(from, to, next, out);
                    from = to;
                }
            }
        }
    }
}

/// Series-parallel decomposition of a two-terminal graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SPTree {
    #[serde(rename = "I")]
    pub source: String,
    #[serde(rename = "T")]
    pub sink: String,
    pub tree: SPNode,
}

/// A graph built from an SP tree: vertices `0` (source) and `1` (sink) plus
/// fresh interior vertices, and one `(a, b, edge index)` per leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedSP {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize, usize)>,
    labels: Vec<(String, String)>,
}

impl SPTree {
    /// Evaluates the tree by series/parallel composition with fresh vertex
    /// names.
    pub fn evaluate(&self) -> EvaluatedSP {
        let mut next = 2;
        let mut raw = Vec::new();
        self.tree.evaluate_into(0, 1, &mut next, &mut raw);
        EvaluatedSP {
            vertex_count: next,
            edges: raw.iter().map(|(a, b, e, _, _)| (*a, *b, *e)).collect(),
            labels: raw.into_iter().map(|(_, _, _, u, v)| (u, v)).collect(),
        }
    }

    /// Checks that evaluating the tree gives a graph isomorphic to `g` by an
    /// isomorphism fixing the terminals, using the leaf labels as witness.
    pub fn reproduces(&self, g: &LinkageGraph) -> bool {
        if !self.tree.check_arity() {
            return false;
        }
        let ev = self.evaluate();
        let mut map: Vec<Option<usize>> = vec![None; ev.vertex_count];
        let (Some(si), Some(ti)) = (g.index_of(&self.source), g.index_of(&self.sink)) else {
            return false;
        };
        map[0] = Some(si);
        map[1] = Some(ti);
        let mut used_edges = vec![false; g.edge_count()];
        for ((a, b, e), (u, v)) in ev.edges.iter().zip(&ev.labels) {
            if *e >= g.edge_count() || used_edges[*e] {
                return false;
            }
            used_edges[*e] = true;
            let (gu, gv) = (g.index_of(u), g.index_of(v));
            let (Some(gu), Some(gv)) = (gu, gv) else {
                return false;
            };
            let ge = &g.edges()[*e];
            let same = (ge.u == *u && ge.v == *v) || (ge.u == *v && ge.v == *u);
            if !same {
                return false;
            }
            for (fresh, orig) in [(*a, gu), (*b, gv)] {
                match map[fresh] {
                    None => map[fresh] = Some(orig),
                    Some(m) if m != orig => return false,
                    _ => {}
                }
            }
        }
        if !used_edges.iter().all(|&u| u) {
            return false;
        }
        // injective on vertices and covers the graph
        let mut hit = vec![false; g.vertex_count()];
        for m in map {
            match m {
                Some(m) if !hit[m] => hit[m] = true,
                _ => return false,
            }
        }
        hit.into_iter().all(|h| h)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("graph with terminals ({source_terminal}, {sink}) is not two-terminal series-parallel; irreducible kernel has {} edges", kernel.len())]
pub struct NotSeriesParallel {
    pub source_terminal: String,
    pub sink: String,
    /// Endpoints of the virtual edges left when no reduction applies.
    pub kernel: Vec<(String, String)>,
}

/// Two-terminal series-parallel decomposition by reduction: merge parallel
/// edges and contract non-terminal degree-2 vertices until only one edge
/// `source-sink` remains.
pub fn sp_decompose(
    g: &LinkageGraph,
    source: &str,
    sink: &str,
) -> Result<SPTree, NotSeriesParallel> {
    let fail = |kernel| NotSeriesParallel {
        source_terminal: source.to_string(),
        sink: sink.to_string(),
        kernel,
    };
    let (Some(si), Some(ti)) = (g.index_of(source), g.index_of(sink)) else {
        return Err(fail(Vec::new()));
    };
    if si == ti {
        return Err(fail(Vec::new()));
    }
    let n = g.vertex_count();
    // virtual edge id -> (a, b, node oriented a->b)
    let mut vedges: Vec<Option<(usize, usize, SPNode)>> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(k, Edge { u, v, .. })| {
            Some((
                g.index_of(u).unwrap(),
                g.index_of(v).unwrap(),
                SPNode::Edge {
                    u: u.clone(),
                    v: v.clone(),
                    edge: k,
                },
            ))
        })
        .collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, e) in vedges.iter().enumerate() {
        let (a, b, _) = e.as_ref().unwrap();
        adj[*a].push(k);
        adj[*b].push(k);
    }

    loop {
        let mut changed = false;

        // parallel merges
        let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (k, e) in vedges.iter().enumerate() {
            if let Some((a, b, _)) = e {
                by_pair.entry(((*a).min(*b), (*a).max(*b))).or_default().push(k);
            }
        }
        for ((lo, hi), ids) in by_pair {
            if ids.len() < 2 {
                continue;
            }
            changed = true;
            let mut acc: Option<SPNode> = None;
            for &k in &ids {
                let (a, _, node) = vedges[k].take().unwrap();
                let node = if a == lo { node } else { node.reversed() };
                acc = Some(match acc {
                    None => node,
                    Some(prev) => SPNode::parallel(prev, node),
                });
                adj[lo].retain(|&x| x != k);
                adj[hi].retain(|&x| x != k);
            }
            let k = vedges.len();
            vedges.push(Some((lo, hi, acc.unwrap())));
            adj[lo].push(k);
            adj[hi].push(k);
        }

        // series contractions
        for x in 0..n {
            if x == si || x == ti || adj[x].len() != 2 {
                continue;
            }
            let (k1, k2) = (adj[x][0], adj[x][1]);
            let (a1, b1, _) = vedges[k1].as_ref().unwrap();
            let (a2, b2, _) = vedges[k2].as_ref().unwrap();
            let p = if *a1 == x { *b1 } else { *a1 };
            let q = if *a2 == x { *b2 } else { *a2 };
            if p == q {
                // a cycle hanging at a single vertex cannot be reduced
                continue;
            }
            changed = true;
            let (a1, _, n1) = vedges[k1].take().unwrap();
            let (a2, _, n2) = vedges[k2].take().unwrap();
            let first = if a1 == p { n1 } else { n1.reversed() };
            let second = if a2 == x { n2 } else { n2.reversed() };
            adj[x].clear();
            adj[p].retain(|&y| y != k1);
            adj[q].retain(|&y| y != k2);
            let k = vedges.len();
            vedges.push(Some((p, q, SPNode::series(first, second))));
            adj[p].push(k);
            adj[q].push(k);
        }

        if !changed {
            break;
        }
    }

    let live: Vec<&(usize, usize, SPNode)> = vedges.iter().flatten().collect();
    if live.len() == 1 {
        let (a, b, node) = live[0];
        if (*a == si && *b == ti) || (*a == ti && *b == si) {
            let node = if *a == si {
                node.clone()
            } else {
                node.clone().reversed()
            };
            return Ok(SPTree {
                source: source.to_string(),
                sink: sink.to_string(),
                tree: node,
            });
        }
    }
    let names = g.vertices();
    Err(fail(
        live.iter()
            .map(|(a, b, _)| (names[*a].clone(), names[*b].clone()))
            .collect(),
    ))
}

/// Edge sets of the biconnected components (blocks) of a connected multigraph.
fn blocks(g: &LinkageGraph) -> Vec<Vec<usize>> {
    struct State<'a> {
        g: &'a LinkageGraph,
        inc: Vec<Vec<usize>>,
        disc: Vec<Option<usize>>,
        low: Vec<usize>,
        time: usize,
        stack: Vec<usize>,
        out: Vec<Vec<usize>>,
    }
    fn dfs(s: &mut State, v: usize, via: Option<usize>) {
        s.disc[v] = Some(s.time);
        s.low[v] = s.time;
        s.time += 1;
        for idx in 0..s.inc[v].len() {
            let e = s.inc[v][idx];
            if Some(e) == via {
                continue;
            }
            let (a, b) = s.g.edge_ends(e);
            let w = if a == v { b } else { a };
            match s.disc[w] {
                None => {
                    s.stack.push(e);
                    dfs(s, w, Some(e));
                    s.low[v] = s.low[v].min(s.low[w]);
                    if s.low[w] >= s.disc[v].unwrap() {
                        let mut block = Vec::new();
                        while let Some(top) = s.stack.pop() {
                            block.push(top);
                            if top == e {
                                break;
                            }
                        }
                        s.out.push(block);
                    }
                }
                Some(dw) if dw < s.disc[v].unwrap() => {
                    s.stack.push(e);
                    s.low[v] = s.low[v].min(dw);
                }
                _ => {}
            }
        }
    }
    let n = g.vertex_count();
    let mut s = State {
        g,
        inc: g.incidence(),
        disc: vec![None; n],
        low: vec![0; n],
        time: 0,
        stack: Vec::new(),
        out: Vec::new(),
    };
    for v in 0..n {
        if s.disc[v].is_none() {
            dfs(&mut s, v, None);
        }
    }
    s.out
}

/// True iff the graph has no K4 minor.
///
/// A graph is K4-minor-free iff each biconnected block is; a block is tested
/// by series-parallel reduction with an adjacent pair of its vertices as
/// terminals, trying pairs in sorted order.
pub fn is_partial_two_tree(g: &LinkageGraph) -> bool {
    blocks(g).into_iter().all(|block| {
        if block.len() == 1 {
            return true;
        }
        let mut names: Vec<String> = Vec::new();
        let mut edges: Vec<Edge> = Vec::new();
        for &e in &block {
            let edge = &g.edges()[e];
            for v in [&edge.u, &edge.v] {
                if !names.contains(v) {
                    names.push(v.clone());
                }
            }
            edges.push(edge.clone());
        }
        let sub = LinkageGraph::new_unchecked_connectivity(names, edges)
            .expect("block of a valid graph");
        let mut pairs: Vec<(String, String)> = sub
            .edges()
            .iter()
            .map(|e| {
                if e.u < e.v {
                    (e.u.clone(), e.v.clone())
                } else {
                    (e.v.clone(), e.u.clone())
                }
            })
            .collect();
        pairs.sort();
        pairs.dedup();
        pairs
            .iter()
            .any(|(a, b)| sp_decompose(&sub, a, b).is_ok())
    })
}
