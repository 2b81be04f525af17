use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::chart::Problem;
use super::search::{
    find_critical_numeric, inertia_at, lagrangian_hessian, multipliers, newton_critical, tangent_basis,
    SearchSettings,
};
use super::OracleError;
use crate::geom::{circle_data, is_aligned, Configuration};
use crate::graph::{relative_decomposition, Linkage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    Aligned,
    Circular,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    PitchforkSplit,
    PitchforkMerge,
    HessianZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub branch: usize,
    pub kind: BranchKind,
    pub area: f64,
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
    pub configuration: Configuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramColumn {
    pub parameter: f64,
    pub points: Vec<BranchPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub parameter: f64,
    pub kind: EventKind,
    pub branch: usize,
    pub branch_kind: BranchKind,
    pub negative_before: usize,
    pub negative_after: usize,
    /// Branches born or ended at this event.
    pub partners: Vec<usize>,
    pub partner_kinds: Vec<BranchKind>,
    pub partner_negative: Vec<usize>,
}

impl Event {
    /// Aligned maximum turning into a minimum with two new circular maxima
    /// on a one-dimensional configuration space.
    pub fn is_max_to_min_split(&self) -> bool {
        self.kind == EventKind::PitchforkSplit
            && self.branch_kind == BranchKind::Aligned
            && self.negative_before == 1
            && self.negative_after == 0
            && self.partners.len() == 2
            && self.partner_kinds.iter().all(|&k| k == BranchKind::Circular)
            && self.partner_negative.iter().all(|&n| n == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDiagram {
    pub edge: usize,
    pub parameters: Vec<f64>,
    pub columns: Vec<DiagramColumn>,
    pub events: Vec<Event>,
    /// Critical point counts from an independent global search at both ends.
    pub endpoint_counts: (usize, usize),
    pub warnings: Vec<String>,
}

impl BranchDiagram {
    /// `parameter,branch,S,neg,zero,pos` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,branch,S,neg,zero,pos\n");
        for col in &self.columns {
            for p in &col.points {
                out.push_str(&format!(
                    "{:.16e},{},{:.16e},{},{},{}\n",
                    col.parameter, p.branch, p.area, p.negative, p.zero, p.positive
                ));
            }
        }
        out
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationSettings {
    pub search: SearchSettings,
    /// Step halvings before a branch is declared lost.
    pub max_halvings: u32,
    /// A corrected point may move at most this fraction of the total length
    /// away from its prediction.
    pub jump_rel: f64,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self {
            search: SearchSettings { n_seeds: 300, ..Default::default() },
            max_halvings: 10,
            jump_rel: 0.05,
        }
    }
}

struct Branch {
    id: usize,
    history: Vec<(f64, DVector<f64>)>,
    alive: bool,
}

/// Labels a critical configuration as aligned (some attached chain is
/// straight), circular (the distinguished cycle is concyclic) or neither.
pub fn branch_kind(linkage: &Linkage, c: &Configuration, rel_tol: f64) -> BranchKind {
    let Some(gamma) = linkage.gamma.as_ref() else {
        return BranchKind::Other;
    };
    let scale = linkage.graph.total_length();
    if let Ok(dec) = relative_decomposition(&linkage.graph, gamma) {
        for comp in &dec.components {
            if let Some(path) = &comp.path {
                if path.len() > 2 && is_aligned(c, path, rel_tol * scale).unwrap_or(false) {
                    return BranchKind::Aligned;
                }
            }
        }
    }
    if circle_data(c, gamma, rel_tol).is_ok() {
        BranchKind::Circular
    } else {
        BranchKind::Other
    }
}

/// Signed eigenvalue count with no zero band: the number of strictly
/// negative eigenvalues of the reduced Lagrangian Hessian.
fn strict_negatives(problem: &Problem, x: &DVector<f64>) -> Option<(usize, DVector<f64>)> {
    let lambda = multipliers(problem, x);
    let h = lagrangian_hessian(problem, x, &lambda);
    let basis = tangent_basis(&problem.chart, x)?;
    let red = basis.transpose() * &h * &basis;
    if red.nrows() == 0 {
        return Some((0, DVector::zeros(basis.nrows())));
    }
    let eig = SymmetricEigen::new((&red + red.transpose()) * 0.5);
    let k = (0..eig.eigenvalues.len())
        .min_by(|&a, &b| eig.eigenvalues[a].abs().partial_cmp(&eig.eigenvalues[b].abs()).unwrap())
        .unwrap();
    let null = &basis * eig.eigenvectors.column(k);
    Some((eig.eigenvalues.iter().filter(|&&v| v < 0.0).count(), null))
}

fn problem_at(base: &Problem, edge: usize, p: f64) -> Problem {
    Problem {
        chart: base.chart.with_length(edge, p),
        objective: base.objective.clone(),
    }
}

/// Follows every critical point found at `from` while the length of `edge`
/// moves to `to` in `steps` equal steps.
pub fn continue_family(
    linkage: &Linkage,
    edge: usize,
    from: f64,
    to: f64,
    steps: usize,
    settings: &ContinuationSettings,
) -> Result<BranchDiagram, OracleError> {
    let gamma = linkage
        .gamma
        .as_ref()
        .ok_or_else(|| OracleError::BadRange("linkage has no distinguished cycle".into()))?;
    if edge >= linkage.graph.edge_count() {
        return Err(OracleError::BadRange(format!("no edge {edge}")));
    }
    if !(from > 0.0 && to > 0.0 && from.is_finite() && to.is_finite()) {
        return Err(OracleError::BadRange("lengths must be positive".into()));
    }
    let steps = if from == to { 0 } else { steps.max(1) };
    let base = Problem::area(&linkage.graph, gamma)?;
    let total = base.scale();
    let params: Vec<f64> = (0..=steps)
        .map(|k| if steps == 0 { from } else { from + (to - from) * k as f64 / steps as f64 })
        .collect();
    let kind_tol = 1e-6;
    let cluster = settings.search.cluster_rel * total;

    let start = find_critical_numeric(&problem_at(&base, edge, from), &settings.search);
    let mut branches: Vec<Branch> = start
        .iter()
        .enumerate()
        .map(|(id, c)| Branch { id, history: vec![(from, c.coords.clone())], alive: true })
        .collect();
    let mut warnings = Vec::new();
    let mut events = Vec::new();
    let mut columns = Vec::new();

    let snapshot = |problem: &Problem, id: usize, x: &DVector<f64>| -> Option<BranchPoint> {
        let t = inertia_at(problem, x, settings.search.tol.eigen_zero).ok()?;
        let c = problem.chart.configuration(x);
        Some(BranchPoint {
            branch: id,
            kind: branch_kind(linkage, &c, kind_tol),
            area: problem.objective.value(&problem.chart, x),
            negative: t.negative,
            zero: t.zero,
            positive: t.positive,
            configuration: c,
        })
    };
    let column = |p: f64, branches: &[Branch]| -> DiagramColumn {
        let problem = problem_at(&base, edge, p);
        let points = branches
            .iter()
            .filter_map(|b| {
                let (q, x) = b.history.last()?;
                if *q != p {
                    return None;
                }
                snapshot(&problem, b.id, x)
            })
            .collect();
        DiagramColumn { parameter: p, points }
    };
    columns.push(column(from, &branches));

    for k in 1..params.len() {
        let (p0, p1) = (params[k - 1], params[k]);
        let before: Vec<Option<usize>> = branches
            .iter()
            .map(|b| {
                let problem = problem_at(&base, edge, p0);
                b.alive.then(|| strict_negatives(&problem, &b.history.last().unwrap().1)).flatten().map(|v| v.0)
            })
            .collect();
        let mut ended_here = Vec::new();
        for b in branches.iter_mut().filter(|b| b.alive) {
            match advance(&base, edge, b, p1, settings, total) {
                Ok(()) => {}
                Err(e) => {
                    warnings.push(format!("branch {}: {e}", b.id));
                    b.alive = false;
                    ended_here.push(b.id);
                }
            }
        }
        // branches that ran into each other are merged into the older one
        let problem1 = problem_at(&base, edge, p1);
        for i in 0..branches.len() {
            for j in (i + 1)..branches.len() {
                if !(branches[i].alive && branches[j].alive) {
                    continue;
                }
                let xi = &branches[i].history.last().unwrap().1;
                let xj = &branches[j].history.last().unwrap().1;
                let d = (problem1.chart.positions(xi) - problem1.chart.positions(xj)).amax();
                if d <= cluster {
                    branches[j].alive = false;
                    ended_here.push(branches[j].id);
                }
            }
        }

        let mut new_branches = Vec::new();
        for bi in 0..branches.len() {
            let b = &branches[bi];
            let Some(neg0) = before[bi] else { continue };
            if !b.alive {
                continue;
            }
            let x1 = b.history.last().unwrap().1.clone();
            let Some((neg1, _)) = strict_negatives(&problem1, &x1) else { continue };
            if neg0 == neg1 {
                continue;
            }
            // locate the sign change of the critical eigenvalue
            let x0 = at_parameter(b, p0).clone();
            let (mut lo, mut hi, mut xlo) = (p0, p1, x0.clone());
            let mut xstar = x0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let pm = problem_at(&base, edge, mid);
                let Some(xm) = newton_critical(&pm, &xlo, &settings.search) else { break };
                let Some((nm, _)) = strict_negatives(&pm, &xm) else { break };
                if nm == neg0 {
                    lo = mid;
                    xlo = xm.clone();
                } else {
                    hi = mid;
                }
                xstar = xm;
            }
            let pstar = 0.5 * (lo + hi);
            let kind = branch_kind(linkage, &problem1.chart.configuration(&x1), kind_tol);
            let mut hz = Event {
                parameter: pstar,
                kind: EventKind::HessianZero,
                branch: b.id,
                branch_kind: kind,
                negative_before: neg0,
                negative_after: neg1,
                partners: Vec::new(),
                partner_kinds: Vec::new(),
                partner_negative: Vec::new(),
            };
            events.push(hz.clone());

            // new branches emanate along the null direction at the event
            let pstar_problem = problem_at(&base, edge, pstar);
            let null = strict_negatives(&pstar_problem, &xstar).map(|v| v.1);
            let mut born = Vec::new();
            if let Some(null) = null {
                for amp in [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3] {
                    for s in [1.0, -1.0] {
                        let guess = &x1 + &null * (s * amp);
                        let Some(y) = newton_critical(&problem1, &guess, &settings.search) else { continue };
                        let py = problem1.chart.positions(&y);
                        let known = branches
                            .iter()
                            .filter(|o| o.alive)
                            .map(|o| &o.history.last().unwrap().1)
                            .chain(born.iter())
                            .chain(new_branches.iter().map(|(_, y)| y))
                            .any(|z| (problem1.chart.positions(z) - &py).amax() <= cluster);
                        if !known {
                            born.push(y);
                        }
                    }
                }
            }
            let last0 = problem_at(&base, edge, p0).chart.positions(at_parameter(b, p0));
            let merged: Vec<usize> = ended_here
                .iter()
                .copied()
                .filter(|&id| {
                    let (q, x) = branches[id].history.last().unwrap();
                    let d = (problem_at(&base, edge, *q).chart.positions(x) - &last0).amax();
                    d <= 0.2 * total
                })
                .collect();
            if born.len() == 2 {
                let ids: Vec<usize> = (0..2).map(|i| branches.len() + new_branches.len() + i).collect();
                for y in &born {
                    let pt = snapshot(&problem1, 0, y);
                    hz.partner_kinds.push(pt.as_ref().map_or(BranchKind::Other, |p| p.kind));
                    hz.partner_negative.push(pt.map_or(0, |p| p.negative));
                }
                for (i, y) in born.into_iter().enumerate() {
                    new_branches.push((ids[i], y));
                }
                hz.partners = ids;
                hz.kind = EventKind::PitchforkSplit;
                events.push(hz);
            } else if merged.len() == 2 {
                for &id in &merged {
                    let o = &branches[id];
                    let (q, x) = o.history.last().unwrap();
                    let pt = snapshot(&problem_at(&base, edge, *q), id, x);
                    hz.partner_kinds.push(pt.as_ref().map_or(BranchKind::Other, |p| p.kind));
                    hz.partner_negative.push(pt.map_or(0, |p| p.negative));
                }
                hz.partners = merged;
                hz.kind = EventKind::PitchforkMerge;
                events.push(hz);
            } else if !born.is_empty() {
                warnings.push(format!(
                    "{} new critical points near the event at {pstar} on branch {}",
                    born.len(),
                    b.id
                ));
                for y in born {
                    new_branches.push((branches.len() + new_branches.len(), y));
                }
            }
            if !columns.iter().any(|c: &DiagramColumn| c.parameter == pstar) {
                let mut col = DiagramColumn { parameter: pstar, points: Vec::new() };
                if let Some(pt) = snapshot(&pstar_problem, b.id, &xstar) {
                    col.points.push(pt);
                }
                columns.push(col);
            }
        }
        for (id, y) in new_branches {
            branches.push(Branch { id, history: vec![(p1, y)], alive: true });
        }
        columns.push(column(p1, &branches));
    }
    columns.sort_by(|a, b| {
        let ord = a.parameter.partial_cmp(&b.parameter).unwrap();
        if from <= to { ord } else { ord.reverse() }
    });
    events.sort_by(|a, b| a.parameter.partial_cmp(&b.parameter).unwrap().then(a.branch.cmp(&b.branch)));

    let end = find_critical_numeric(&problem_at(&base, edge, to), &settings.search).len();
    Ok(BranchDiagram {
        edge,
        parameters: params,
        columns,
        events,
        endpoint_counts: (start.len(), end),
        warnings,
    })
}

fn at_parameter(b: &Branch, p: f64) -> &DVector<f64> {
    &b.history.iter().rev().find(|(q, _)| *q == p).unwrap_or_else(|| b.history.last().unwrap()).1
}

/// Moves a branch to parameter `target` with a secant predictor, a Newton
/// corrector and step halving.
fn advance(
    base: &Problem,
    edge: usize,
    b: &mut Branch,
    target: f64,
    settings: &ContinuationSettings,
    total: f64,
) -> Result<(), OracleError> {
    let (mut p, mut x) = b.history.last().cloned().unwrap();
    let full = target - p;
    let mut h = full;
    let mut halvings = 0;
    while p != target {
        let next = if (target - p).abs() <= h.abs() { target } else { p + h };
        let pred = match b.history.len() {
            0 | 1 => x.clone(),
            n => {
                let (pp, xp) = &b.history[n - 2];
                if (p - pp).abs() > 0.0 {
                    &x + (&x - xp) * ((next - p) / (p - pp))
                } else {
                    x.clone()
                }
            }
        };
        let problem = problem_at(base, edge, next);
        let ok = newton_critical(&problem, &pred, &settings.search).filter(|y| {
            (problem.chart.positions(y) - problem.chart.positions(&pred)).amax()
                <= settings.jump_rel * total
        });
        match ok {
            Some(y) => {
                // intermediate points are kept only for the secant
                if next != target {
                    b.history.push((next, y.clone()));
                }
                p = next;
                x = y;
                h = (2.0 * h).clamp(-full.abs(), full.abs());
                if h.abs() > full.abs() || h.signum() != full.signum() {
                    h = full;
                }
            }
            None => {
                halvings += 1;
                if halvings > settings.max_halvings {
                    return Err(OracleError::BranchLost { parameter: p });
                }
                h /= 2.0;
            }
        }
    }
    b.history.push((target, x));
    Ok(())
}
