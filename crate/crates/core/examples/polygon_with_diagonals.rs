//! An 11-gon cut by two chains into a quadrilateral, a triangle and an
//! octagon, with a critical point of index 8 = 1 + 0 + 5 + 1 + 1.

use linkage_area::config::Tolerances;
use linkage_area::critical::enumerate_critical_pnd;
use linkage_area::graph::{Linkage, LinkageGraph};
use linkage_area::oracle::{constrained_inertia, Problem};

fn main() -> anyhow::Result<()> {
    let gamma = [1.14, 0.99, 0.82, 0.95, 1.37, 0.72, 0.63, 1.21, 1.18, 1.12, 1.26];
    let mut edges: Vec<(String, String, f64)> =
        (0..11).map(|i| (format!("v{i}"), format!("v{}", (i + 1) % 11), gamma[i])).collect();
    for (u, v, len) in [("v0", "x1", 0.9), ("x1", "x2", 1.08), ("x2", "v3", 0.93), ("v3", "y1", 0.88), ("y1", "v5", 0.84)] {
        edges.push((u.into(), v.into(), len));
    }
    let l = Linkage::new(LinkageGraph::from_edges(&edges)?, Some((0..11).map(|i| format!("v{i}")).collect()))?;

    let records = enumerate_critical_pnd(&l)?;
    println!("{} critical points", records.len());
    let top = records.iter().find(|r| r.index.index == 8 && r.kind_key() == "A++-,A++").unwrap();
    for (cells, (part, mu)) in top.cell_vertices.iter().map(Some).chain(std::iter::repeat(None)).zip(&top.index.breakdown) {
        match cells {
            Some(v) => println!("  {part}: {mu}  ({} sides: {})", v.len(), v.join(" ")),
            None => println!("  {part}: {mu}"),
        }
    }

    let problem = Problem::area(&l.graph, l.gamma.as_ref().unwrap())?;
    let t = constrained_inertia(&problem, &top.representative, &Tolerances::default())?;
    println!("numeric inertia: {} negative, {} zero, {} positive", t.negative, t.zero, t.positive);
    Ok(())
}
