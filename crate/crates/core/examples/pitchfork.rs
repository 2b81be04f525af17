//! Follows the critical points of a [2,2;2] linkage while one edge of the
//! free chain grows past the length where both triangles share a circle.

use linkage_area::critical::{hessian_zero_parameters_222, ConcyclicShape};
use linkage_area::graph::Linkage;
use linkage_area::oracle::{continue_family, ContinuationSettings};

fn main() -> anyhow::Result<()> {
    let (a1, a2, b1, b2, c2) = (1.0, 1.3, 1.1, 0.9, 0.8);
    let l = Linkage::three_chain(&[a1, a2], &[b1, b2], &[0.62, c2])?;
    let edge = l.graph.find_edge("I", "Z1").unwrap();
    let d = continue_family(&l, edge, 0.62, 0.85, 25, &ContinuationSettings::default())?;

    println!("critical points at the ends: {:?}", d.endpoint_counts);
    for e in &d.events {
        println!(
            "{:?} at {:.10} on {:?} branch {}: index {} -> {}, new {:?}",
            e.kind, e.parameter, e.branch_kind, e.branch, e.negative_before, e.negative_after, e.partners
        );
    }
    for (c1, signs, shape) in hessian_zero_parameters_222(a1, a2, b1, b2, c2) {
        if shape == ConcyclicShape::Convex {
            println!("concyclic at c1 = {c1:.10} for signs {signs:?}");
        }
    }
    let path = std::env::temp_dir().join("pitchfork.csv");
    std::fs::write(&path, d.to_csv())?;
    println!("wrote {}", path.display());
    Ok(())
}
