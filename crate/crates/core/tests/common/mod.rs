#![allow(dead_code)]

use linkage_area::graph::{Linkage, LinkageGraph};
use rand::seq::SliceRandom;
use rand::Rng;

pub type EdgeList = Vec<(String, String, f64)>;

fn grow_sp<R: Rng>(rng: &mut R, depth: u32, s: &str, t: &str, next: &mut usize, out: &mut EdgeList) {
    let pick = if depth == 0 { 0 } else { rng.gen_range(0..3) };
    match pick {
        0 => out.push((s.to_string(), t.to_string(), rng.gen_range(0.5..1.5))),
        1 => {
            let m = format!("n{next}");
            *next += 1;
            grow_sp(rng, depth - 1, s, &m, next, out);
            grow_sp(rng, depth - 1, &m, t, next, out);
        }
        _ => {
            grow_sp(rng, depth - 1, s, t, next, out);
            grow_sp(rng, depth - 1, s, t, next, out);
        }
    }
}

/// Random two-terminal series-parallel graph with terminals `s` and `t`.
pub fn random_sp<R: Rng>(rng: &mut R, depth: u32) -> LinkageGraph {
    let mut edges = EdgeList::new();
    let mut next = 0;
    while edges.len() < 2 {
        edges.clear();
        grow_sp(rng, depth, "s", "t", &mut next, &mut edges);
    }
    edges.shuffle(rng);
    LinkageGraph::from_edges(&edges).expect("valid SP graph")
}

/// K4 with every edge subdivided a random number of times, plus random
/// series-parallel pieces hung between adjacent vertices.
pub fn random_subdivided_k4<R: Rng>(rng: &mut R) -> LinkageGraph {
    let corners = ["a", "b", "c", "d"];
    let mut edges = EdgeList::new();
    let mut next = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            let mut at = corners[i].to_string();
            for _ in 0..rng.gen_range(0..3) {
                let m = format!("k{next}");
                next += 1;
                edges.push((at, m.clone(), rng.gen_range(0.5..1.5)));
                at = m;
            }
            edges.push((at, corners[j].to_string(), rng.gen_range(0.5..1.5)));
        }
    }
    for _ in 0..rng.gen_range(0..3) {
        let (u, v) = {
            let e = edges.choose(rng).unwrap();
            (e.0.clone(), e.1.clone())
        };
        grow_sp(rng, 2, &u, &v, &mut next, &mut edges);
    }
    edges.shuffle(rng);
    LinkageGraph::from_edges(&edges).expect("valid graph")
}

/// Polygon `v0 .. v10` cut by chains `v0-x1-x2-v3` and `v3-y1-v5` into a
/// quadrilateral, a triangle and an octagon.
pub fn three_cell_linkage(gamma: &[f64], z3: &[f64], z2: &[f64]) -> Linkage {
    let mut edges: EdgeList = (0..11)
        .map(|i| (format!("v{i}"), format!("v{}", (i + 1) % 11), gamma[i]))
        .collect();
    edges.push(("v0".into(), "x1".into(), z3[0]));
    edges.push(("x1".into(), "x2".into(), z3[1]));
    edges.push(("x2".into(), "v3".into(), z3[2]));
    edges.push(("v3".into(), "y1".into(), z2[0]));
    edges.push(("y1".into(), "v5".into(), z2[1]));
    let g = LinkageGraph::from_edges(&edges).unwrap();
    Linkage::new(g, Some((0..11).map(|i| format!("v{i}")).collect())).unwrap()
}

/// Lengths of an index-8 critical point of [`three_cell_linkage`].
pub const WORKED_GAMMA: [f64; 11] = [1.14, 0.99, 0.82, 0.95, 1.37, 0.72, 0.63, 1.21, 1.18, 1.12, 1.26];
pub const WORKED_Z3: [f64; 3] = [0.9, 1.08, 0.93];
pub const WORKED_Z2: [f64; 2] = [0.88, 0.84];

pub fn worked_example() -> Linkage {
    three_cell_linkage(&WORKED_GAMMA, &WORKED_Z3, &WORKED_Z2)
}

/// Generic random lengths in `[lo, hi)`, rejecting values near a wall.
pub fn generic_three_chain<R: Rng>(rng: &mut R, p: usize, q: usize, r: usize) -> Linkage {
    loop {
        let mut len = |k: usize| (0..k).map(|_| rng.gen_range(0.4..1.6)).collect::<Vec<f64>>();
        let (a, b, z) = (len(p), len(q), len(r));
        let l = Linkage::three_chain(&a, &b, &z).unwrap();
        if linkage_area::geom::wall_check(&l.graph, 1e-3).is_clean() {
            return l;
        }
    }
}

pub fn generic_polygon<R: Rng>(rng: &mut R, n: usize) -> Linkage {
    loop {
        let lengths: Vec<f64> = (0..n).map(|_| rng.gen_range(0.4..1.6)).collect();
        let longest = lengths.iter().cloned().fold(0.0, f64::max);
        if 2.0 * longest >= lengths.iter().sum::<f64>() {
            continue;
        }
        let l = Linkage::polygon(&lengths).unwrap();
        if linkage_area::geom::wall_check(&l.graph, 1e-3).is_clean() {
            return l;
        }
    }
}
