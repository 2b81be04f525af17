//! Partial two-tree recognition, SP trees and the decomposition relative to
//! a distinguished cycle.

use linkage_area::graph::{is_partial_two_tree, relative_decomposition, sp_decompose, Linkage, LinkageGraph};

fn main() -> anyhow::Result<()> {
    let l = Linkage::three_chain(&[1.0, 1.3], &[1.1, 0.9, 0.8], &[0.7, 0.8])?;
    println!("[2,3;2] partial two-tree: {}", is_partial_two_tree(&l.graph));

    let tree = sp_decompose(&l.graph, "I", "T")?;
    println!("SP tree rebuilds the graph: {}", tree.reproduces(&l.graph));
    println!("{}", serde_json::to_string(&tree)?);

    let gamma = l.gamma.as_ref().unwrap();
    let dec = relative_decomposition(&l.graph, gamma)?;
    println!("cycle {:?}", gamma.vertices());
    for c in &dec.components {
        println!("  attached at {:?}, path {:?}", c.attachments, c.path);
    }

    let k4 = LinkageGraph::from_edges(&[
        ("a", "b", 1.0),
        ("b", "c", 1.0),
        ("c", "a", 1.0),
        ("a", "d", 1.0),
        ("b", "d", 1.0),
        ("c", "d", 1.0),
    ])?;
    println!("K4 partial two-tree: {}", is_partial_two_tree(&k4));
    Ok(())
}
