use serde::{Deserialize, Serialize};

use super::pnd::PolygonWithDiagonals;
use super::{ChainStatus, CriticalError, CriticalRecord, ManifoldFactor};
use crate::config::Tolerances;
use crate::geom::circle_data_points;
use crate::geom::{chain_reach, cross, oriented_area, points_aligned, Configuration, CyclicPolygon};
use crate::graph::{elementary_cycles, Linkage, SegmentKind};
use crate::morse::{aligned_nu, cyclic_index, IndexReport, OpenChainCritical};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainVerdict {
    pub aligned: bool,
    /// Endpoint distance.
    pub distance: f64,
    /// Direction of each edge relative to the endpoint vector, when aligned.
    pub signs: Option<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellVerdict {
    pub vertices: Vec<String>,
    pub concyclic: bool,
    pub polygon: Option<CyclicPolygon>,
    /// Why the cell failed the circle test.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub chains: Vec<ChainVerdict>,
    pub cells: Vec<CellVerdict>,
    pub critical: bool,
    /// Filled in when the configuration is critical and its index is
    /// computable.
    pub record: Option<CriticalRecord>,
    pub index_error: Option<String>,
}

/// Straightens aligned chains into diagonals and tests every resulting cell
/// for a circumscribed circle.
pub fn classify_configuration(
    linkage: &Linkage,
    c: &Configuration,
    tol: &Tolerances,
) -> Result<Classification, CriticalError> {
    let pnd = PolygonWithDiagonals::from_linkage(linkage)?;
    let scale = pnd.total_length;
    let mut chains = Vec::with_capacity(pnd.chains.len());
    for chain in &pnd.chains {
        let pts = c.points(&chain.vertices)?;
        let w = pts[pts.len() - 1] - pts[0];
        let distance = w.norm();
        let aligned = distance > tol.length * scale && points_aligned(&pts, tol.collinear * scale);
        let signs = aligned.then(|| {
            pts.windows(2)
                .map(|p| if (p[1] - p[0]).dot(&w) > 0.0 { 1 } else { -1 })
                .collect()
        });
        chains.push(ChainVerdict { aligned, distance, signs });
    }

    let aligned: Vec<usize> = (0..chains.len()).filter(|&j| chains[j].aligned).collect();
    let diagonals: Vec<(String, String)> = aligned
        .iter()
        .map(|&j| {
            let v = &pnd.chains[j].vertices;
            (v[0].clone(), v[v.len() - 1].clone())
        })
        .collect();
    let cells = elementary_cycles(&pnd.gamma, &diagonals)?;
    let mut verdicts = Vec::with_capacity(cells.len());
    for cell in &cells {
        let vertices = cell.vertex_ids(&pnd.gamma);
        let fit = c
            .points(&vertices)
            .map_err(|e| e.to_string())
            .and_then(|pts| circle_data_points(&pts, tol.concyclic).map_err(|e| e.to_string()));
        verdicts.push(match fit {
            Ok(p) => CellVerdict { vertices, concyclic: true, polygon: Some(p), reason: None },
            Err(e) => CellVerdict { vertices, concyclic: false, polygon: None, reason: Some(e) },
        });
    }
    let critical = verdicts.iter().all(|v| v.concyclic);

    let mut out = Classification { chains, cells: verdicts, critical, record: None, index_error: None };
    if !critical {
        return Ok(out);
    }

    let polys: Vec<CyclicPolygon> = out.cells.iter().map(|v| v.polygon.clone().unwrap()).collect();
    let mut breakdown = Vec::new();
    let mut index_error = None;
    for (ci, p) in polys.iter().enumerate() {
        match cyclic_index(p) {
            Ok(mu) => breakdown.push((format!("cell {ci}"), mu)),
            Err(e) => index_error = Some(format!("cell {ci}: {e}")),
        }
    }
    let mut kind = Vec::new();
    let mut factors = Vec::new();
    for (j, chain) in pnd.chains.iter().enumerate() {
        let v = &out.chains[j];
        let pts = c.points(&chain.vertices)?;
        if let Some(signs) = &v.signs {
            let k = aligned.iter().position(|&a| a == j).unwrap();
            let host = cells
                .iter()
                .position(|cl| cl.segments.iter().any(|s| s.kind == SegmentKind::Diagonal { index: k, forward: true }))
                .unwrap();
            let nu = OpenChainCritical::from_points(&pts, tol.collinear * scale)
                .map_err(|e| e.to_string())
                .and_then(|z| {
                    aligned_nu(&z, &polys[k + 1].center, &polys[host].center, tol.length * scale)
                        .map(|nu| (z, nu))
                        .map_err(|e| e.to_string())
                });
            match nu {
                Ok((z, nu)) => {
                    breakdown.push((format!("chain {j}"), nu as i64));
                    kind.push(ChainStatus::Aligned { signs: signs.clone(), f: z.f, w: v.distance });
                }
                Err(e) => {
                    index_error = Some(format!("chain {j}: {e}"));
                    kind.push(ChainStatus::Aligned {
                        signs: signs.clone(),
                        f: signs.iter().filter(|&&s| s > 0).count(),
                        w: v.distance,
                    });
                }
            }
        } else {
            let mut poly = chain.lengths.clone();
            poly.push(v.distance);
            let elbow = (chain.edge_count() == 2)
                .then(|| if cross(&(pts[2] - pts[0]), &(pts[1] - pts[0])) > 0.0 { 1 } else { -1 });
            factors.push(ManifoldFactor {
                chain: j,
                polygon_lengths: poly,
                dim: chain.edge_count().saturating_sub(2),
                elbow,
            });
            kind.push(ChainStatus::Free { distance: v.distance, reach: chain_reach(&chain.lengths) });
        }
    }
    let manifold_dim = factors.iter().map(|f| f.dim).sum();
    if index_error.is_none() {
        out.record = Some(CriticalRecord {
            kind,
            cells: polys,
            cell_vertices: out.cells.iter().map(|v| v.vertices.clone()).collect(),
            representative: c.clone(),
            area: oriented_area(c, &pnd.gamma)?,
            index: IndexReport::from_parts(breakdown, manifold_dim),
            manifold_dim,
            manifold_factors: factors,
        });
    }
    out.index_error = index_error;
    Ok(out)
}
