use nalgebra::Matrix2;
use rayon::prelude::*;

use super::{sort_records, ChainStatus, CriticalError, CriticalRecord, ManifoldFactor};
use crate::geom::{
    chain_reach, cross, enumerate_cyclic, oriented_area, rotation, Configuration, CyclicPolygon, Point,
};
use crate::graph::{elementary_cycles, relative_decomposition, Cell, DistinguishedCycle, Linkage, SegmentKind};
use crate::morse::{aligned_nu, cyclic_index, IndexReport, MorseError, OpenChainCritical};

/// A path attached to Γ at two distinct vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// Vertex ids, starting at the attachment earlier on Γ.
    pub vertices: Vec<String>,
    pub lengths: Vec<f64>,
    /// Cycle positions of the first and last vertex.
    pub ends: (usize, usize),
}

impl Chain {
    pub fn edge_count(&self) -> usize {
        self.lengths.len()
    }
}

/// Γ together with chains whose endpoint pairs never cross along Γ.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonWithDiagonals {
    pub gamma: DistinguishedCycle,
    /// `gamma_lengths[i]` joins `gamma[i]` to `gamma[i + 1]`.
    pub gamma_lengths: Vec<f64>,
    pub chains: Vec<Chain>,
    pub total_length: f64,
}

impl PolygonWithDiagonals {
    pub fn from_linkage(linkage: &Linkage) -> Result<Self, CriticalError> {
        let gamma = linkage
            .gamma
            .clone()
            .ok_or_else(|| CriticalError::NotInClass("no distinguished cycle".into()))?;
        let g = &linkage.graph;
        let dec = relative_decomposition(g, &gamma)?;
        let gamma_lengths = dec.gamma_edges.iter().map(|&e| g.edges()[e].length).collect();
        let mut chains = Vec::with_capacity(dec.components.len());
        for comp in &dec.components {
            let path = match (&comp.path, comp.attachments.len()) {
                (Some(p), 2) => p,
                _ => {
                    return Err(CriticalError::NotInClass(format!(
                        "component at {:?} is not a path between two cycle vertices",
                        comp.attachments
                    )))
                }
            };
            let mut lengths = Vec::with_capacity(path.len() - 1);
            for w in path.windows(2) {
                let e = comp
                    .edges
                    .iter()
                    .copied()
                    .find(|&e| {
                        let ed = &g.edges()[e];
                        (ed.u == w[0] && ed.v == w[1]) || (ed.u == w[1] && ed.v == w[0])
                    })
                    .ok_or_else(|| CriticalError::NotInClass("path edge missing".into()))?;
                lengths.push(g.edges()[e].length);
            }
            let pa = gamma.position(&path[0]).expect("attachment on cycle");
            let pb = gamma.position(path.last().unwrap()).expect("attachment on cycle");
            chains.push(Chain { vertices: path.clone(), lengths, ends: (pa, pb) });
        }
        // reject crossing pairs up front; elementary_cycles only sees aligned ones
        let all: Vec<(String, String)> = chains
            .iter()
            .map(|c| (c.vertices[0].clone(), c.vertices.last().unwrap().clone()))
            .collect();
        elementary_cycles(&gamma, &all)?;
        Ok(Self { gamma, gamma_lengths, chains, total_length: g.total_length() })
    }

    fn diagonal(&self, k: usize) -> (String, String) {
        let c = &self.chains[k];
        (c.vertices[0].clone(), c.vertices.last().unwrap().clone())
    }
}

/// Relative slack on reach boundaries and on aligned lengths.
const GENERIC_REL: f64 = 1e-9;

/// All critical points and critical manifolds of a polygon with
/// non-crossing diagonal chains.
pub fn enumerate_critical_pnd(linkage: &Linkage) -> Result<Vec<CriticalRecord>, CriticalError> {
    let pnd = PolygonWithDiagonals::from_linkage(linkage)?;
    enumerate(&pnd)
}

/// Records of a three-chain `[p,q;r]`.
pub fn enumerate_critical_three_chain(linkage: &Linkage) -> Result<Vec<CriticalRecord>, CriticalError> {
    let (i, t) = linkage
        .terminals
        .clone()
        .ok_or_else(|| CriticalError::NotInClass("three-chain needs terminals".into()))?;
    let pnd = PolygonWithDiagonals::from_linkage(linkage)?;
    let [z] = pnd.chains.as_slice() else {
        return Err(CriticalError::NotInClass(format!("expected one chain off the cycle, found {}", pnd.chains.len())));
    };
    let ends = [z.vertices[0].as_str(), z.vertices.last().unwrap().as_str()];
    if !(ends.contains(&i.as_str()) && ends.contains(&t.as_str())) {
        return Err(CriticalError::NotInClass("chain does not join the terminals".into()));
    }
    enumerate(&pnd)
}

/// One combinatorial branch: which chains are aligned and with which signs.
#[derive(Debug, Clone)]
struct Branch {
    /// `Some(signs)` for aligned chains.
    signs: Vec<Option<Vec<i8>>>,
}

fn branches(pnd: &PolygonWithDiagonals) -> Vec<Branch> {
    let k = pnd.chains.len();
    let tol = GENERIC_REL * pnd.total_length;
    let mut out = Vec::new();
    for mask in 0..(1u64 << k) {
        let per_chain: Vec<Vec<Option<Vec<i8>>>> = pnd
            .chains
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if mask >> j & 1 == 0 {
                    // a single edge is always straight
                    if c.edge_count() == 1 {
                        vec![]
                    } else {
                        vec![None]
                    }
                } else {
                    (0..1u64 << c.edge_count())
                        .map(|m| (0..c.edge_count()).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).collect::<Vec<i8>>())
                        .filter(|s| signed_length(&c.lengths, s) > tol)
                        .map(Some)
                        .collect()
                }
            })
            .collect();
        out.extend(product(&per_chain).into_iter().map(|signs| Branch { signs }));
    }
    out
}

/// Cartesian product; one empty tuple for no factors.
fn product<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    lists.iter().fold(vec![Vec::new()], |acc, list| {
        acc.iter()
            .flat_map(|prefix| {
                list.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect()
    })
}

fn signed_length(lengths: &[f64], signs: &[i8]) -> f64 {
    lengths.iter().zip(signs).map(|(&l, &s)| s as f64 * l).sum()
}

fn enumerate(pnd: &PolygonWithDiagonals) -> Result<Vec<CriticalRecord>, CriticalError> {
    let results: Vec<Result<Vec<CriticalRecord>, CriticalError>> =
        branches(pnd).par_iter().map(|b| enumerate_branch(pnd, b)).collect();
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    sort_records(&mut records);
    Ok(records)
}

fn enumerate_branch(pnd: &PolygonWithDiagonals, branch: &Branch) -> Result<Vec<CriticalRecord>, CriticalError> {
    let aligned: Vec<usize> = (0..pnd.chains.len()).filter(|&j| branch.signs[j].is_some()).collect();
    let widths: Vec<f64> = aligned
        .iter()
        .map(|&j| signed_length(&pnd.chains[j].lengths, branch.signs[j].as_ref().unwrap()))
        .collect();
    let diagonals: Vec<(String, String)> = aligned.iter().map(|&j| pnd.diagonal(j)).collect();
    let cells = elementary_cycles(&pnd.gamma, &diagonals)?;

    let mut solutions: Vec<Vec<CyclicPolygon>> = Vec::with_capacity(cells.len());
    for cell in &cells {
        if cell.len() < 3 {
            // a two-sided cell closes only on a measure-zero set of lengths
            return Ok(vec![]);
        }
        let lengths: Vec<f64> = cell
            .segments
            .iter()
            .map(|s| match s.kind {
                SegmentKind::Gamma(i) => pnd.gamma_lengths[i],
                SegmentKind::Diagonal { index, .. } => widths[index],
            })
            .collect();
        let longest = lengths.iter().cloned().fold(0.0, f64::max);
        if 2.0 * longest >= lengths.iter().sum::<f64>() {
            return Ok(vec![]);
        }
        let found = enumerate_cyclic(&lengths)?;
        if found.polygons.is_empty() {
            return Ok(vec![]);
        }
        solutions.push(found.polygons);
    }

    let mut out = Vec::new();
    let refs: Vec<Vec<&CyclicPolygon>> = solutions.iter().map(|s| s.iter().collect()).collect();
    for choice in product(&refs) {
        out.extend(assemble(pnd, branch, &aligned, &widths, &cells, &choice)?);
    }
    Ok(out)
}

fn transform_polygon(p: &CyclicPolygon, rot: &Matrix2<f64>, shift: &Point) -> CyclicPolygon {
    let mut q = p.clone();
    q.center = rot * p.center + shift;
    for v in &mut q.vertices {
        *v = rot * *v + shift;
    }
    q
}

/// Places every cell in one frame. Cell 0 stays put; a cell inside a
/// diagonal is moved rigidly onto the already placed copy of that diagonal.
fn glue(cells: &[Cell], polys: &[&CyclicPolygon]) -> Vec<CyclicPolygon> {
    let mut placed: Vec<Option<CyclicPolygon>> = vec![None; cells.len()];
    placed[0] = Some(polys[0].clone());
    let mut progress = true;
    while progress {
        progress = false;
        for k in 0..cells.len() - 1 {
            if placed[k + 1].is_some() {
                continue;
            }
            // the neighbour traversing diagonal k forwards
            let Some((host, seg)) = cells.iter().enumerate().find_map(|(ci, c)| {
                c.segments
                    .iter()
                    .position(|s| s.kind == SegmentKind::Diagonal { index: k, forward: true })
                    .map(|si| (ci, si))
            }) else {
                continue;
            };
            let Some(hp) = placed[host].as_ref() else { continue };
            let n_host = cells[host].len();
            let (ta, tb) = (hp.vertices[seg], hp.vertices[(seg + 1) % n_host]);
            let own = cells[k + 1].len() - 1;
            let child = polys[k + 1];
            // the child runs the diagonal backwards: from its far end b to a
            let (sb, sa) = (child.vertices[own], child.vertices[0]);
            let (ds, dt) = (sb - sa, tb - ta);
            let angle = cross(&ds, &dt).atan2(ds.dot(&dt));
            let rot = rotation(angle);
            let shift = ta - rot * sa;
            placed[k + 1] = Some(transform_polygon(child, &rot, &shift));
            progress = true;
        }
    }
    placed.into_iter().map(|p| p.expect("every diagonal has a host cell")).collect()
}

/// Deterministic interior placement of an open chain between `pa` and `pb`:
/// each joint goes to the middle of the distances the rest of the chain can
/// still close, turning counterclockwise; the final elbow takes `elbow`.
fn place_free_chain(lengths: &[f64], pa: Point, pb: Point, elbow: i8) -> Vec<Point> {
    let mut pts = vec![pa];
    let mut at = pa;
    for i in 0..lengths.len() - 1 {
        let d = (pb - at).norm();
        let c = lengths[i];
        let rest = &lengths[i + 1..];
        let (t, sign) = if rest.len() == 1 {
            (rest[0], elbow as f64)
        } else {
            let reach = chain_reach(rest);
            let lo = reach.dmin.max((d - c).abs());
            let hi = reach.dmax.min(d + c);
            (0.5 * (lo + hi), 1.0)
        };
        let cos_phi = ((d * d + c * c - t * t) / (2.0 * d * c)).clamp(-1.0, 1.0);
        let phi = sign * cos_phi.acos();
        let dir = (pb - at) / d;
        at += rotation(phi) * dir * c;
        pts.push(at);
    }
    pts.push(pb);
    pts
}

fn assemble(
    pnd: &PolygonWithDiagonals,
    branch: &Branch,
    aligned: &[usize],
    widths: &[f64],
    cells: &[Cell],
    choice: &[&CyclicPolygon],
) -> Result<Vec<CriticalRecord>, CriticalError> {
    let placed = glue(cells, choice);
    let n = pnd.gamma.len();
    let mut gamma_pts: Vec<Option<Point>> = vec![None; n];
    for (cell, poly) in cells.iter().zip(&placed) {
        for (s, v) in cell.segments.iter().zip(&poly.vertices) {
            gamma_pts[s.from].get_or_insert(*v);
        }
    }
    let gamma_pts: Vec<Point> = gamma_pts.into_iter().map(|p| p.expect("cells cover the cycle")).collect();

    // frame: gamma[0] at the origin, gamma[1] on the positive x axis
    let d01 = gamma_pts[1] - gamma_pts[0];
    let rot = rotation(-d01.y.atan2(d01.x));
    let shift = -(rot * gamma_pts[0]);
    let gamma_pts: Vec<Point> = gamma_pts.iter().map(|p| rot * p + shift).collect();
    let placed: Vec<CyclicPolygon> = placed.iter().map(|p| transform_polygon(p, &rot, &shift)).collect();

    let mut rep = Configuration::new();
    for (v, p) in pnd.gamma.vertices().iter().zip(&gamma_pts) {
        rep.insert(v.clone(), *p);
    }

    let scale = pnd.total_length;
    let tol = GENERIC_REL * scale;
    let mut kind = Vec::with_capacity(pnd.chains.len());
    let mut factors = Vec::new();
    let mut breakdown: Vec<(String, i64)> = Vec::new();
    for (ci, p) in placed.iter().enumerate() {
        breakdown.push((format!("cell {ci}"), cyclic_index(p)?));
    }
    for (j, chain) in pnd.chains.iter().enumerate() {
        let (pa, pb) = (gamma_pts[chain.ends.0], gamma_pts[chain.ends.1]);
        match &branch.signs[j] {
            Some(signs) => {
                let k = aligned.iter().position(|&a| a == j).unwrap();
                let w = widths[k];
                let dir = (pb - pa) / w;
                let mut s = 0.0;
                for (i, v) in chain.vertices.iter().enumerate().skip(1).take(chain.edge_count() - 1) {
                    s += signs[i - 1] as f64 * chain.lengths[i - 1];
                    rep.insert(v.clone(), pa + dir * s);
                }
                let crit = OpenChainCritical::new(chain.edge_count(), signs.iter().filter(|&&s| s > 0).count(), pb - pa)?;
                let ob = host_center(cells, &placed, k);
                let oa = placed[k + 1].center;
                let nu = aligned_nu(&crit, &oa, &ob, tol).map_err(|e| match e {
                    MorseError::CoincidingCenters => CriticalError::NonGeneric(format!(
                        "chain {j} is aligned while its two cells share a circumcircle"
                    )),
                    e => e.into(),
                })?;
                breakdown.push((format!("chain {j}"), nu as i64));
                kind.push(ChainStatus::Aligned { signs: signs.clone(), f: crit.f, w });
            }
            None => {
                let d = (pb - pa).norm();
                let reach = chain_reach(&chain.lengths);
                let margin = reach.margin(d);
                if margin < -tol {
                    return Ok(vec![]);
                }
                if margin <= tol {
                    return Err(CriticalError::NonGeneric(format!(
                        "chain {j} endpoints at distance {d} on the boundary of its reach"
                    )));
                }
                let mut poly = chain.lengths.clone();
                poly.push(d);
                factors.push(ManifoldFactor { chain: j, polygon_lengths: poly, dim: chain.edge_count() - 2, elbow: None });
                kind.push(ChainStatus::Free { distance: d, reach });
            }
        }
    }

    // a two-edge free chain has two isolated placements
    let two_edge: Vec<usize> = factors.iter().enumerate().filter(|(_, f)| f.dim == 0).map(|(i, _)| i).collect();
    let manifold_dim = factors.iter().map(|f| f.dim).sum();
    let index = IndexReport::from_parts(breakdown, manifold_dim);
    let cell_vertices: Vec<Vec<String>> = cells.iter().map(|c| c.vertex_ids(&pnd.gamma)).collect();

    let mut variants = Vec::new();
    for mask in 0..(1u64 << two_edge.len()) {
        let mut rep = rep.clone();
        let mut factors = factors.clone();
        for (fi, f) in factors.iter_mut().enumerate() {
            let chain = &pnd.chains[f.chain];
            let elbow = match two_edge.iter().position(|&t| t == fi) {
                Some(b) => {
                    let e = if mask >> b & 1 == 0 { 1 } else { -1 };
                    f.elbow = Some(e);
                    e
                }
                None => 1,
            };
            let pts = place_free_chain(&chain.lengths, gamma_pts[chain.ends.0], gamma_pts[chain.ends.1], elbow);
            for (v, p) in chain.vertices.iter().zip(&pts).skip(1).take(chain.edge_count() - 1) {
                rep.insert(v.clone(), *p);
            }
        }
        let area = oriented_area(&rep, &pnd.gamma)?;
        variants.push(CriticalRecord {
            kind: kind.clone(),
            cells: placed.clone(),
            cell_vertices: cell_vertices.clone(),
            representative: rep,
            area,
            index: index.clone(),
            manifold_dim,
            manifold_factors: factors,
        });
    }
    Ok(variants)
}

fn host_center(cells: &[Cell], placed: &[CyclicPolygon], k: usize) -> Point {
    cells
        .iter()
        .position(|c| c.segments.iter().any(|s| s.kind == SegmentKind::Diagonal { index: k, forward: true }))
        .map(|ci| placed[ci].center)
        .expect("every diagonal has a host cell")
}
