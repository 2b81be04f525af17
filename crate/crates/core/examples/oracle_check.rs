//! Cross-checks symbolic records against a random-restart numeric search and
//! finite differences.

use linkage_area::critical::{enumerate_critical_three_chain, match_numeric, PolygonWithDiagonals};
use linkage_area::graph::Linkage;
use linkage_area::oracle::{fd_check, find_critical_numeric, Problem, SearchSettings};

fn main() -> anyhow::Result<()> {
    let l = Linkage::three_chain(&[1.0, 1.3], &[1.1, 0.9, 0.8], &[0.9, 0.8])?;
    let records = enumerate_critical_three_chain(&l)?;
    let problem = Problem::area(&l.graph, l.gamma.as_ref().unwrap())?;
    let found = find_critical_numeric(&problem, &SearchSettings::default());

    let pnd = PolygonWithDiagonals::from_linkage(&l)?;
    let m = match_numeric(&pnd, &records, &found, 1e-5);
    println!("{} records, {} numeric critical points", records.len(), found.len());
    println!("unmatched records {:?}, unmatched numeric {:?}", m.unmatched_records(), m.unmatched_oracle);
    println!("index disagreements: {}", m.index_mismatches.len());

    let worst = records
        .iter()
        .map(|r| fd_check(&problem, &r.representative))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0f64, |a, r| a.max(r.gradient_error).max(r.hessian_error));
    println!("worst finite-difference error at the representatives: {worst:.2e}");
    Ok(())
}
