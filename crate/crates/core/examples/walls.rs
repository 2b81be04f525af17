//! Reach intervals of open chains and the wall test for generic lengths.

use linkage_area::geom::{chain_reach, wall_check};
use linkage_area::graph::Linkage;

fn main() -> anyhow::Result<()> {
    for lengths in [vec![1.0, 1.0], vec![3.0, 1.0, 1.0], vec![0.62, 0.8, 0.7]] {
        let r = chain_reach(&lengths);
        println!("chain {lengths:?}: endpoint distance in [{}, {}]", r.dmin, r.dmax);
    }
    for z1 in [0.6, 0.62] {
        let l = Linkage::three_chain(&[1.0, 1.3], &[1.1, 0.9], &[z1, 0.8])?;
        let report = wall_check(&l.graph, 1e-9);
        println!("z1 = {z1}: {} cycles, min margin {:.3e}, {} hits", report.cycles_checked, report.min_margin, report.hits.len());
        for h in &report.hits {
            println!("  edges {:?} signs {:?}", h.cycle_edges, h.signs);
        }
    }
    Ok(())
}
