use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{is_partial_two_tree, sp_decompose, DistinguishedCycle, Edge, GraphError, LinkageGraph, SPTree};

/// A connected piece of the graph hanging off the distinguished cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachedComponent {
    /// Edge indices into the parent graph.
    pub edges: Vec<usize>,
    /// Cycle vertices where the component is glued, in cycle order (1 or 2).
    pub attachments: Vec<String>,
    /// Decomposition with the two attachments as terminals, when it exists.
    pub sp_tree: Option<SPTree>,
    /// Vertex sequence when the component is a simple path between its two
    /// attachments, listed from the attachment earlier on the cycle.
    pub path: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeDecomposition {
    pub gamma: DistinguishedCycle,
    pub gamma_edges: Vec<usize>,
    pub components: Vec<AttachedComponent>,
}

/// Splits `g` into Γ and the components attached to it. Two non-Γ edges
/// belong to the same component iff they are joined through vertices off Γ.
pub fn relative_decomposition(
    g: &LinkageGraph,
    gamma: &DistinguishedCycle,
) -> Result<RelativeDecomposition, GraphError> {
    if !is_partial_two_tree(g) {
        return Err(GraphError::NotPtt("graph has a K4 minor".into()));
    }
    let gamma_edges = gamma.edge_indices(g);
    let on_gamma: Vec<bool> = (0..g.vertex_count())
        .map(|v| gamma.position(&g.vertices()[v]).is_some())
        .collect();
    let is_gamma_edge: BTreeSet<usize> = gamma_edges.iter().copied().collect();

    // union-find over edges, joined at off-cycle vertices
    let m = g.edge_count();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nxt = p[y];
            p[y] = r;
            y = nxt;
        }
        r
    }
    let inc = g.incidence();
    for (v, edges) in inc.iter().enumerate() {
        if on_gamma[v] {
            continue;
        }
        let free: Vec<usize> = edges
            .iter()
            .copied()
            .filter(|e| !is_gamma_edge.contains(e))
            .collect();
        for w in free.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }

    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for e in 0..m {
        if is_gamma_edge.contains(&e) {
            continue;
        }
        let r = find(&mut parent, e);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, list)) => list.push(e),
            None => groups.push((r, vec![e])),
        }
    }

    let mut components = Vec::new();
    for (_, edges) in groups {
        let mut verts: Vec<String> = Vec::new();
        for &e in &edges {
            let edge = &g.edges()[e];
            for v in [&edge.u, &edge.v] {
                if !verts.contains(v) {
                    verts.push(v.clone());
                }
            }
        }
        let mut attachments: Vec<String> = verts
            .iter()
            .filter(|v| gamma.position(v).is_some())
            .cloned()
            .collect();
        attachments.sort_by_key(|v| gamma.position(v).unwrap());
        if attachments.len() > 2 {
            return Err(GraphError::NotPtt(format!(
                "component attached to the cycle at {} vertices",
                attachments.len()
            )));
        }
        let sub_edges: Vec<Edge> = edges.iter().map(|&e| g.edges()[e].clone()).collect();
        let sub = LinkageGraph::new_unchecked_connectivity(verts, sub_edges)?;
        let (sp_tree, path) = if attachments.len() == 2 {
            let tree = sp_decompose(&sub, &attachments[0], &attachments[1]).ok();
            let path = simple_path(&sub, &attachments[0], &attachments[1]);
            (tree, path)
        } else {
            (None, None)
        };
        components.push(AttachedComponent {
            edges,
            attachments,
            sp_tree,
            path,
        });
    }

    Ok(RelativeDecomposition {
        gamma: gamma.clone(),
        gamma_edges,
        components,
    })
}

/// Vertex sequence if `sub` is exactly a simple path from `a` to `b`.
fn simple_path(sub: &LinkageGraph, a: &str, b: &str) -> Option<Vec<String>> {
    if sub.edge_count() + 1 != sub.vertex_count() {
        return None;
    }
    let inc = sub.incidence();
    if inc.iter().any(|i| i.len() > 2) {
        return None;
    }
    let mut at = sub.index_of(a)?;
    let target = sub.index_of(b)?;
    let mut prev_edge = None;
    let mut out = vec![a.to_string()];
    while at != target {
        let e = *inc[at].iter().find(|&&e| Some(e) != prev_edge)?;
        let (x, y) = sub.edge_ends(e);
        at = if x == at { y } else { x };
        prev_edge = Some(e);
        out.push(sub.vertices()[at].clone());
    }
    (out.len() == sub.vertex_count()).then_some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    /// Cycle edge number `i`, from `gamma[i]` to `gamma[i+1]`.
    Gamma(usize),
    /// Diagonal number `index`; `forward` when traversed from its endpoint
    /// earlier on the cycle to the later one.
    Diagonal { index: usize, forward: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    /// Cycle positions of the endpoints.
    pub from: usize,
    pub to: usize,
    pub kind: SegmentKind,
}

/// One elementary cycle: a closed walk over cycle edges and diagonals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub segments: Vec<Segment>,
}

impl Cell {
    /// Cycle positions of the cell's vertices, in traversal order.
    pub fn positions(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.from).collect()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn vertex_ids(&self, gamma: &DistinguishedCycle) -> Vec<String> {
        self.positions()
            .into_iter()
            .map(|p| gamma.vertices()[p].clone())
            .collect()
    }
}

/// Cuts Γ along pairwise non-crossing diagonals.
///
/// Returns `diagonals.len() + 1` cells, all oriented like Γ. Cell 0 is the one
/// containing the edge `gamma[n-1] -> gamma[0]`; cell `k + 1` lies inside
/// diagonal `k` and traverses it backwards, while its neighbour across the
/// diagonal traverses it forwards.
pub fn elementary_cycles(
    gamma: &DistinguishedCycle,
    diagonals: &[(String, String)],
) -> Result<Vec<Cell>, GraphError> {
    let n = gamma.len();
    let mut spans: Vec<(usize, usize)> = Vec::with_capacity(diagonals.len());
    for (a, b) in diagonals {
        let (Some(pa), Some(pb)) = (gamma.position(a), gamma.position(b)) else {
            return Err(GraphError::BadDiagonal((a.clone(), b.clone())));
        };
        if pa == pb {
            return Err(GraphError::BadDiagonal((a.clone(), b.clone())));
        }
        spans.push((pa.min(pb), pa.max(pb)));
    }
    for i in 0..spans.len() {
        for j in i + 1..spans.len() {
            let ((a, b), (c, d)) = (spans[i], spans[j]);
            if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                return Err(GraphError::CrossingDiagonals(
                    diagonals[i].clone(),
                    diagonals[j].clone(),
                ));
            }
        }
    }

    // laminar forest: sort by (start asc, end desc, index) and nest with a stack
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by(|&x, &y| {
        let (a, b) = spans[x];
        let (c, d) = spans[y];
        a.cmp(&c).then(d.cmp(&b)).then(x.cmp(&y))
    });
    let mut parent: Vec<Option<usize>> = vec![None; spans.len()];
    let mut stack: Vec<usize> = Vec::new();
    for &k in &order {
        let (a, b) = spans[k];
        while let Some(&top) = stack.last() {
            let (c, d) = spans[top];
            if c <= a && b <= d {
                break;
            }
            stack.pop();
        }
        parent[k] = stack.last().copied();
        stack.push(k);
    }
    let children_of = |p: Option<usize>| -> Vec<usize> {
        (0..spans.len()).filter(|&k| parent[k] == p).collect()
    };

    let walk = |from: usize, to: usize, kids: &[usize]| -> Vec<Segment> {
        let mut segs = Vec::new();
        let mut at = from;
        while at != to {
            if let Some(&k) = kids.iter().find(|&&k| spans[k].0 == at) {
                segs.push(Segment {
                    from: at,
                    to: spans[k].1,
                    kind: SegmentKind::Diagonal {
                        index: k,
                        forward: true,
                    },
                });
                at = spans[k].1;
            } else {
                segs.push(Segment {
                    from: at,
                    to: (at + 1) % n,
                    kind: SegmentKind::Gamma(at),
                });
                at = (at + 1) % n;
            }
        }
        segs
    };

    let mut cells = Vec::with_capacity(spans.len() + 1);
    let top = children_of(None);
    let mut outer = walk(0, n - 1, &top);
    outer.push(Segment {
        from: n - 1,
        to: 0,
        kind: SegmentKind::Gamma(n - 1),
    });
    cells.push(Cell { segments: outer });
    for (k, &(a, b)) in spans.iter().enumerate() {
        let kids = children_of(Some(k));
        let mut segs = walk(a, b, &kids);
        segs.push(Segment {
            from: b,
            to: a,
            kind: SegmentKind::Diagonal {
                index: k,
                forward: false,
            },
        });
        cells.push(Cell { segments: segs });
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Linkage;

    fn ngon(n: usize) -> DistinguishedCycle {
        let l = Linkage::polygon(&vec![1.0; n]).unwrap();
        l.gamma.unwrap()
    }

    fn d(a: usize, b: usize) -> (String, String) {
        (format!("v{a}"), format!("v{b}"))
    }

    #[test]
    fn no_diagonals() {
        let g = ngon(5);
        let cells = elementary_cycles(&g, &[]).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].positions(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn hexagon_one_diagonal() {
        // v1..v6 are positions 0..5; diagonal (v1, v4)
        let g = ngon(6);
        let cells = elementary_cycles(&g, &[d(0, 3)]).unwrap();
        assert_eq!(cells.len(), 2);
        assert!(cells.iter().all(|c| c.len() == 4));
        assert_eq!(cells[0].positions(), vec![0, 3, 4, 5]);
        assert_eq!(cells[1].positions(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn heptagon_two_diagonals() {
        let g = ngon(7);
        let cells = elementary_cycles(&g, &[d(0, 3), d(3, 6)]).unwrap();
        let sizes: Vec<usize> = cells.iter().map(Cell::len).collect();
        assert_eq!(sizes, vec![3, 4, 4]);
    }

    #[test]
    fn crossing_rejected() {
        let g = ngon(6);
        assert!(matches!(
            elementary_cycles(&g, &[d(0, 3), d(1, 4)]),
            Err(GraphError::CrossingDiagonals(..))
        ));
        // sharing an endpoint is not a crossing
        assert!(elementary_cycles(&g, &[d(0, 3), d(0, 2)]).is_ok());
    }

    #[test]
    fn edge_multiset() {
        let g = ngon(9);
        let diags = [d(0, 4), d(1, 3), d(4, 8), d(5, 7), d(5, 8)];
        let cells = elementary_cycles(&g, &diags).unwrap();
        let mut gamma_count = [0; 9];
        let mut diag_dirs = vec![(0, 0); diags.len()];
        for c in &cells {
            // closed walk
            for w in 0..c.len() {
                assert_eq!(c.segments[w].to, c.segments[(w + 1) % c.len()].from);
            }
            for s in &c.segments {
                match s.kind {
                    SegmentKind::Gamma(i) => gamma_count[i] += 1,
                    SegmentKind::Diagonal { index, forward } => {
                        if forward {
                            diag_dirs[index].0 += 1
                        } else {
                            diag_dirs[index].1 += 1
                        }
                    }
                }
            }
        }
        assert!(gamma_count.iter().all(|&c| c == 1));
        assert!(diag_dirs.iter().all(|&p| p == (1, 1)));
    }

    #[test]
    fn three_chain_decomposition() {
        let l = Linkage::three_chain(&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        let dec = relative_decomposition(&l.graph, l.gamma.as_ref().unwrap()).unwrap();
        assert_eq!(dec.components.len(), 1);
        let c = &dec.components[0];
        assert_eq!(c.attachments, vec!["I", "T"]);
        assert_eq!(c.path.as_ref().unwrap(), &["I", "Z1", "Z2", "T"]);
        assert!(c.sp_tree.is_some());
    }

    #[test]
    fn polygon_alone_has_no_components() {
        let l = Linkage::polygon(&[1.0, 1.2, 1.3, 0.9]).unwrap();
        let dec = relative_decomposition(&l.graph, l.gamma.as_ref().unwrap()).unwrap();
        assert!(dec.components.is_empty());
    }

    #[test]
    fn polygon_with_two_diagonal_chains() {
        let mut edges: Vec<(String, String, f64)> = (0..6)
            .map(|i| (format!("v{i}"), format!("v{}", (i + 1) % 6), 1.0))
            .collect();
        edges.push(("v0".into(), "x".into(), 1.0));
        edges.push(("x".into(), "v3".into(), 1.0));
        edges.push(("v3".into(), "y".into(), 1.0));
        edges.push(("y".into(), "z".into(), 1.0));
        edges.push(("z".into(), "v5".into(), 1.0));
        let g = LinkageGraph::from_edges(&edges).unwrap();
        let gamma = DistinguishedCycle::new(&g, (0..6).map(|i| format!("v{i}")).collect()).unwrap();
        let dec = relative_decomposition(&g, &gamma).unwrap();
        assert_eq!(dec.components.len(), 2);
        assert_eq!(dec.components[0].path.as_ref().unwrap(), &["v0", "x", "v3"]);
        assert_eq!(dec.components[1].path.as_ref().unwrap(), &["v3", "y", "z", "v5"]);
        let covered: usize = dec.components.iter().map(|c| c.edges.len()).sum();
        assert_eq!(covered + 6, g.edge_count());
    }

    #[test]
    fn k4_rejected() {
        let g = LinkageGraph::from_edges(&[
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "a", 1.0),
            ("a", "d", 1.0),
            ("b", "d", 1.0),
            ("c", "d", 1.0),
        ])
        .unwrap();
        let gamma = DistinguishedCycle::new(&g, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        assert!(matches!(
            relative_decomposition(&g, &gamma),
            Err(GraphError::NotPtt(_))
        ));
    }
}
