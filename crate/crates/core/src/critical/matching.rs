use serde::{Deserialize, Serialize};

use super::{ChainStatus, CriticalRecord, PolygonWithDiagonals};
use crate::geom::Configuration;
use crate::oracle::NumericCritical;

/// Vertices pinned down by a record up to isometry: everything except the
/// interior joints of free chains that still move.
pub fn rigid_vertices(pnd: &PolygonWithDiagonals, record: &CriticalRecord) -> Vec<String> {
    let mut out: Vec<String> = pnd.gamma.vertices().to_vec();
    for (chain, status) in pnd.chains.iter().zip(&record.kind) {
        let inner = &chain.vertices[1..chain.vertices.len() - 1];
        let rigid = match status {
            ChainStatus::Aligned { .. } => true,
            ChainStatus::Free { .. } => chain.edge_count() == 2,
        };
        if rigid {
            out.extend(inner.iter().cloned());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMismatch {
    pub record: usize,
    pub oracle: usize,
    pub expected_index: i64,
    pub expected_dim: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    /// Oracle points matched to each record.
    pub hits: Vec<Vec<usize>>,
    pub unmatched_oracle: Vec<usize>,
    pub index_mismatches: Vec<IndexMismatch>,
}

impl MatchReport {
    pub fn unmatched_records(&self) -> Vec<usize> {
        (0..self.hits.len()).filter(|&i| self.hits[i].is_empty()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.unmatched_oracle.is_empty() && self.index_mismatches.is_empty() && self.unmatched_records().is_empty()
    }
}

fn frame(c: &Configuration, pnd: &PolygonWithDiagonals) -> Option<Configuration> {
    let g = pnd.gamma.vertices();
    c.normalized(&g[0], &g[1]).ok()
}

/// Pairs numeric critical points with records, comparing rigid vertices
/// after moving `gamma[0]` to the origin and `gamma[1]` onto the x axis.
pub fn match_numeric(
    pnd: &PolygonWithDiagonals,
    records: &[CriticalRecord],
    found: &[NumericCritical],
    rel_tol: f64,
) -> MatchReport {
    let tol = rel_tol * pnd.total_length;
    let reps: Vec<Option<Configuration>> = records.iter().map(|r| frame(&r.representative, pnd)).collect();
    let rigid: Vec<Vec<String>> = records.iter().map(|r| rigid_vertices(pnd, r)).collect();
    let mut report = MatchReport { hits: vec![Vec::new(); records.len()], unmatched_oracle: Vec::new(), index_mismatches: Vec::new() };
    for (oi, n) in found.iter().enumerate() {
        let Some(c) = frame(&n.configuration, pnd) else {
            report.unmatched_oracle.push(oi);
            continue;
        };
        let best = records
            .iter()
            .enumerate()
            .filter_map(|(ri, _)| {
                let rep = reps[ri].as_ref()?;
                let d = rep.max_distance(&c, &rigid[ri]).ok()?;
                (d <= tol).then_some((ri, d))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((ri, _)) => {
                report.hits[ri].push(oi);
                let r = &records[ri];
                if r.index.index != n.inertia.negative as i64 || r.manifold_dim != n.inertia.zero {
                    report.index_mismatches.push(IndexMismatch {
                        record: ri,
                        oracle: oi,
                        expected_index: r.index.index,
                        expected_dim: r.manifold_dim,
                        negative: n.inertia.negative,
                        zero: n.inertia.zero,
                    });
                }
            }
            None => report.unmatched_oracle.push(oi),
        }
    }
    report
}
