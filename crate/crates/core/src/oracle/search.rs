use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chart::{AngleChart, Problem};
use super::OracleError;
use crate::config::Tolerances;
use crate::geom::Configuration;

/// Eigenvalue sign counts of a reduced Hessian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InertiaTriple {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
    pub eigenvalues: Vec<f64>,
    /// Absolute zero band used for the counts.
    pub zero_band: f64,
    /// Smallest nonzero eigenvalue magnitude over the band; large means a
    /// clean separation.
    pub gap: f64,
}

impl InertiaTriple {
    pub fn dimension(&self) -> usize {
        self.negative + self.zero + self.positive
    }
}

/// Search controls for [`find_critical_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    pub n_seeds: usize,
    pub seed: u64,
    pub tol: Tolerances,
    pub max_newton: usize,
    /// Largest Newton step in radians.
    pub step_cap: f64,
    /// Distinct points differ by more than this fraction of the total length.
    pub cluster_rel: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            n_seeds: 1000,
            seed: 42,
            tol: Tolerances::default(),
            max_newton: 100,
            step_cap: 0.5,
            cluster_rel: 1e-5,
        }
    }
}

/// A critical point found by the oracle.
#[derive(Debug, Clone)]
pub struct NumericCritical {
    pub coords: DVector<f64>,
    pub configuration: Configuration,
    pub value: f64,
    pub inertia: InertiaTriple,
    pub multipliers: DVector<f64>,
    /// Seeds that converged here.
    pub hits: usize,
}

fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.pseudo_inverse(1e-13 * smax.max(f64::MIN_POSITIVE))
        .expect("svd computed with both factors")
}

/// Gauss-Newton on the closure residuals.
pub fn project_to_manifold(chart: &AngleChart, x0: &DVector<f64>) -> Result<DVector<f64>, OracleError> {
    let tol = 1e-12 * chart.total_length();
    let mut x = x0.clone();
    for _ in 0..100 {
        let r = chart.constraints(&x);
        if r.norm() <= tol {
            return Ok(x);
        }
        let j = chart.constraint_jacobian(&x);
        let step = pinv(&j) * r;
        let cap = 0.5 / step.amax().max(0.5);
        x -= step * cap;
    }
    if chart.constraints(&x).norm() <= tol {
        Ok(x)
    } else {
        Err(OracleError::NoConvergence)
    }
}

/// Least-squares multipliers with `grad F ~ J^T lambda`.
pub fn multipliers(problem: &Problem, x: &DVector<f64>) -> DVector<f64> {
    let j = problem.chart.constraint_jacobian(x);
    let g = problem.objective.gradient(&problem.chart, x);
    pinv(&j.transpose()) * g
}

/// Gradient component tangent to the constraint set.
pub fn projected_gradient(problem: &Problem, x: &DVector<f64>) -> DVector<f64> {
    let j = problem.chart.constraint_jacobian(x);
    let g = problem.objective.gradient(&problem.chart, x);
    if j.nrows() == 0 {
        return g;
    }
    &g - j.transpose() * (pinv(&j.transpose()) * &g)
}

/// Lagrangian Hessian `Hess F - sum lambda_j Hess g_j`.
pub fn lagrangian_hessian(problem: &Problem, x: &DVector<f64>, lambda: &DVector<f64>) -> DMatrix<f64> {
    let h = problem.objective.hessian(&problem.chart, x);
    if lambda.is_empty() {
        return h;
    }
    h - problem.chart.constraint_curvature(x, lambda)
}

/// Orthonormal basis of the constraint tangent space, or `None` where the
/// Jacobian loses rank.
pub fn tangent_basis(chart: &AngleChart, x: &DVector<f64>) -> Option<DMatrix<f64>> {
    let n = chart.variable_count();
    let m = chart.constraint_count();
    if m == 0 {
        return Some(DMatrix::identity(n, n));
    }
    if m > n {
        return None;
    }
    let j = chart.constraint_jacobian(x);
    let eig = SymmetricEigen::new(j.transpose() * &j);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let scale = chart.total_length().powi(2);
    // the m-th largest eigenvalue is the squared smallest singular value
    if eig.eigenvalues[order[n - m]] < 1e-14 * scale {
        return None;
    }
    let keep = &order[..n - m];
    Some(DMatrix::from_fn(n, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]))
}

/// Smallest singular value of the constraint Jacobian.
pub fn jacobian_conditioning(chart: &AngleChart, x: &DVector<f64>) -> f64 {
    let j = chart.constraint_jacobian(x);
    if j.nrows() == 0 {
        return f64::INFINITY;
    }
    j.svd(false, false).singular_values.min()
}

/// Inertia of the Lagrangian Hessian restricted to the tangent space.
pub fn inertia_at(problem: &Problem, x: &DVector<f64>, eigen_zero: f64) -> Result<InertiaTriple, OracleError> {
    let lambda = multipliers(problem, x);
    let h = lagrangian_hessian(problem, x, &lambda);
    let basis = tangent_basis(&problem.chart, x).ok_or(OracleError::Singular)?;
    let reduced = basis.transpose() * &h * &basis;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let band = eigen_zero * h.norm().max(f64::MIN_POSITIVE);
    let mut eigenvalues: Vec<f64> = if reduced.nrows() == 0 {
        Vec::new()
    } else {
        SymmetricEigen::new(reduced).eigenvalues.iter().copied().collect()
    };
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let negative = eigenvalues.iter().filter(|&&v| v < -band).count();
    let positive = eigenvalues.iter().filter(|&&v| v > band).count();
    let gap = eigenvalues
        .iter()
        .map(|v| v.abs())
        .filter(|&v| v > band)
        .fold(f64::INFINITY, f64::min)
        / band;
    Ok(InertiaTriple {
        negative,
        zero: eigenvalues.len() - negative - positive,
        positive,
        eigenvalues,
        zero_band: band,
        gap,
    })
}

/// Newton iteration on the first-order conditions, re-projected onto the
/// constraint set after each step. Returns the final point when the
/// tangent gradient drops below `tol.gradient * L^2`.
pub fn newton_critical(problem: &Problem, x0: &DVector<f64>, settings: &SearchSettings) -> Option<DVector<f64>> {
    let chart = &problem.chart;
    let scale = problem.scale().powi(2);
    let n = chart.variable_count();
    let m = chart.constraint_count();
    let mut x = project_to_manifold(chart, x0).ok()?;
    for _ in 0..settings.max_newton {
        let pg = projected_gradient(problem, &x);
        if pg.norm() <= settings.tol.gradient * scale {
            return Some(x);
        }
        let lambda = multipliers(problem, &x);
        let g = problem.objective.gradient(chart, &x);
        let j = chart.constraint_jacobian(&x);
        let h = lagrangian_hessian(problem, &x, &lambda);
        let mut kkt = DMatrix::zeros(n + m, n + m);
        kkt.view_mut((0, 0), (n, n)).copy_from(&h);
        if m > 0 {
            kkt.view_mut((0, n), (n, m)).copy_from(&(-j.transpose()));
            kkt.view_mut((n, 0), (m, n)).copy_from(&j);
        }
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(-(&g - j.transpose() * &lambda)));
        if m > 0 {
            rhs.rows_mut(n, m).copy_from(&(-chart.constraints(&x)));
        }
        let step = pinv(&kkt) * rhs;
        let mut dx = step.rows(0, n).into_owned();
        let big = dx.amax();
        if big > settings.step_cap {
            dx *= settings.step_cap / big;
        }
        x = project_to_manifold(chart, &(&x + dx)).ok()?;
    }
    let pg = projected_gradient(problem, &x);
    (pg.norm() <= settings.tol.gradient * scale).then_some(x)
}

/// Random feasible starting point for seed `k`.
pub fn random_start(chart: &AngleChart, seed: u64, k: u64) -> Option<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let x0 = DVector::from_fn(chart.variable_count(), |_, _| {
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
    });
    project_to_manifold(chart, &x0).ok()
}

/// Critical points of the objective reached by Newton from random seeds,
/// clustered by vertex positions and ordered by first discovering seed.
pub fn find_critical_numeric(problem: &Problem, settings: &SearchSettings) -> Vec<NumericCritical> {
    let chart = &problem.chart;
    let total = problem.scale();
    let converged: Vec<Option<DVector<f64>>> = (0..settings.n_seeds as u64)
        .into_par_iter()
        .map(|k| {
            let x0 = random_start(chart, settings.seed, k)?;
            let x = newton_critical(problem, &x0, settings)?;
            // singular points of the configuration space are not critical
            // points of a smooth chart
            (jacobian_conditioning(chart, &x) > 1e-6 * total).then_some(x)
        })
        .collect();

    let mut found: Vec<(DVector<f64>, DVector<f64>, usize)> = Vec::new();
    for x in converged.into_iter().flatten() {
        let p = chart.positions(&x);
        match found
            .iter_mut()
            .find(|(_, q, _)| (q - &p).amax() <= settings.cluster_rel * total)
        {
            Some(entry) => entry.2 += 1,
            None => found.push((x, p, 1)),
        }
    }
    found
        .into_par_iter()
        .filter_map(|(x, _, hits)| {
            let inertia = inertia_at(problem, &x, settings.tol.eigen_zero).ok()?;
            Some(NumericCritical {
                configuration: chart.configuration(&x),
                value: problem.objective.value(chart, &x),
                multipliers: multipliers(problem, &x),
                coords: x,
                inertia,
                hits,
            })
        })
        .collect()
}

/// Inertia at a given configuration, after checking that it is critical.
pub fn constrained_inertia(
    problem: &Problem,
    c: &Configuration,
    tol: &Tolerances,
) -> Result<InertiaTriple, OracleError> {
    let x = problem.chart.coordinates(c)?;
    let scale = problem.scale().powi(2);
    let x = project_to_manifold(&problem.chart, &x)?;
    let pg = projected_gradient(problem, &x).norm();
    if pg > 1e-6 * scale {
        return Err(OracleError::NotCritical { gradient: pg });
    }
    // polish so the multipliers and Hessian are evaluated at the exact point
    let settings = SearchSettings { tol: *tol, ..Default::default() };
    let x = newton_critical(problem, &x, &settings).unwrap_or(x);
    inertia_at(problem, &x, tol.eigen_zero)
}

/// Objective value at a configuration.
pub fn objective_at(problem: &Problem, c: &Configuration) -> Result<f64, OracleError> {
    let x = problem.chart.coordinates(c)?;
    Ok(problem.objective.value(&problem.chart, &x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Linkage;
    use crate::oracle::ChartObjective;

    fn area_problem(l: &Linkage) -> Problem {
        Problem::area(&l.graph, l.gamma.as_ref().unwrap()).unwrap()
    }

    #[test]
    fn projection_fixed_point_and_triangle() {
        let l = Linkage::polygon(&[1.0; 3]).unwrap();
        let p = area_problem(&l);
        for k in 0..20 {
            let x = random_start(&p.chart, 7, k).unwrap();
            let again = project_to_manifold(&p.chart, &x).unwrap();
            assert_eq!(x, again);
            let s = p.objective.value(&p.chart, &x);
            assert!((s.abs() - 3f64.sqrt() / 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn square_has_two_nondegenerate_critical_points() {
        let l = Linkage::polygon(&[1.0; 4]).unwrap();
        let p = area_problem(&l);
        let settings = SearchSettings { n_seeds: 200, ..Default::default() };
        let found = find_critical_numeric(&p, &settings);
        // the rhombus linkage lies on a wall; its folded circles have zero
        // area throughout and come out as degenerate critical points
        let (flat, mut proper): (Vec<_>, Vec<_>) = found.into_iter().partition(|f| f.value.abs() < 1e-9);
        assert!(flat.iter().all(|f| f.inertia.zero == 1));
        proper.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
        assert_eq!(proper.len(), 2);
        assert!((proper[0].value + 1.0).abs() < 1e-10);
        assert!((proper[1].value - 1.0).abs() < 1e-10);
        assert_eq!((proper[0].inertia.negative, proper[0].inertia.positive), (0, 1));
        assert_eq!((proper[1].inertia.negative, proper[1].inertia.positive), (1, 0));
    }

    #[test]
    fn generic_quadrilateral_matches_cyclic_count() {
        let lengths = [1.0, 1.3, 0.8, 1.1];
        let l = Linkage::polygon(&lengths).unwrap();
        let p = area_problem(&l);
        let settings = SearchSettings { n_seeds: 300, ..Default::default() };
        let found = find_critical_numeric(&p, &settings);
        let cyclic = crate::geom::enumerate_cyclic(&lengths).unwrap();
        assert_eq!(found.len(), cyclic.polygons.len());
        for f in &found {
            assert_eq!(f.inertia.zero, 0);
        }
    }

    #[test]
    fn rigid_triangle() {
        let l = Linkage::polygon(&[1.0; 3]).unwrap();
        let p = area_problem(&l);
        let settings = SearchSettings { n_seeds: 50, ..Default::default() };
        let found = find_critical_numeric(&p, &settings);
        assert_eq!(found.len(), 2);
        for f in &found {
            assert_eq!(f.inertia.dimension(), 0);
        }
    }

    #[test]
    fn inertia_ignores_gauge() {
        let l = Linkage::polygon(&[1.0, 1.3, 0.8, 1.1, 0.9]).unwrap();
        let p = area_problem(&l);
        let settings = SearchSettings { n_seeds: 200, ..Default::default() };
        let found = find_critical_numeric(&p, &settings);
        assert!(!found.is_empty());
        for gauge in 0..5 {
            let chart = AngleChart::with_gauge(&l.graph, gauge);
            let obj = ChartObjective::oriented_area(&chart, l.gamma.as_ref().unwrap()).unwrap();
            let q = Problem { chart, objective: obj };
            for f in &found {
                let t = constrained_inertia(&q, &f.configuration, &Tolerances::default()).unwrap();
                assert_eq!((t.negative, t.zero, t.positive), (f.inertia.negative, f.inertia.zero, f.inertia.positive));
            }
        }
    }
}
