//! Symbolic critical points of three-chains: isolated points for [2,2;2],
//! Bott-Morse circles for [2,2;3].

use linkage_area::critical::{enumerate_critical_three_chain, euler_sum, CriticalRecord};
use linkage_area::graph::Linkage;

fn show(name: &str, records: &[CriticalRecord]) {
    println!("{name}: {} records, Euler sum {:?}", records.len(), euler_sum(records).ok());
    for r in records {
        let parts: Vec<String> = r.index.breakdown.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!(
            "  index {} dim {} kind {:<6} area {:>9.5}  [{}]",
            r.index.index,
            r.manifold_dim,
            r.kind_key(),
            r.area,
            parts.join(", ")
        );
    }
}

fn main() -> anyhow::Result<()> {
    let l = Linkage::three_chain(&[1.0, 1.3], &[1.1, 0.9], &[0.8, 0.8])?;
    show("[2,2;2]", &enumerate_critical_three_chain(&l)?);

    let l = Linkage::three_chain(&[1.0, 1.3], &[1.1, 0.9], &[0.62, 0.8, 0.7])?;
    show("[2,2;3]", &enumerate_critical_three_chain(&l)?);
    Ok(())
}
