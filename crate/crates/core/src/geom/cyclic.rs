use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cross, Configuration, GeomError, Point};
use crate::graph::DistinguishedCycle;

/// A polygon inscribed in a circle, with the data the index formula needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicPolygon {
    pub lengths: Vec<f64>,
    pub center: Point,
    pub radius: f64,
    pub vertices: Vec<Point>,
    /// `+1` when the center is strictly left of edge `i`.
    pub eps: Vec<i8>,
    /// Half the central angle subtended by each edge, in `(0, pi/2]`.
    pub alphas: Vec<f64>,
    pub winding: i32,
    /// Number of positive entries of `eps`.
    pub positive: usize,
}

impl CyclicPolygon {
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn area(&self) -> f64 {
        super::shoelace(&self.vertices)
    }

    pub fn eps_mask(&self) -> u64 {
        self.eps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    pub fn closure_residual(&self) -> f64 {
        let n = self.vertices.len();
        let mut sum = Point::zeros();
        for i in 0..n {
            sum += self.vertices[(i + 1) % n] - self.vertices[i];
        }
        // closed by construction; measure the last edge against its length instead
        let last = (self.vertices[0] - self.vertices[n - 1]).norm() - self.lengths[n - 1];
        sum.norm().max(last.abs())
    }

    /// Checks every structural invariant; returns the first violation.
    pub fn check_invariants(&self, tol: f64) -> Result<(), String> {
        let n = self.lengths.len();
        let scale = self.lengths.iter().sum::<f64>();
        if self.vertices.len() != n || self.eps.len() != n || self.alphas.len() != n {
            return Err("field lengths disagree".into());
        }
        for (i, p) in self.vertices.iter().enumerate() {
            if ((p - self.center).norm() - self.radius).abs() > tol * self.radius {
                return Err(format!("vertex {i} off the circle"));
            }
        }
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            if ((b - a).norm() - self.lengths[i]).abs() > tol * scale {
                return Err(format!("edge {i} has wrong length"));
            }
            if (2.0 * self.radius * self.alphas[i].sin() - self.lengths[i]).abs() > tol * scale {
                return Err(format!("alpha {i} inconsistent with length"));
            }
            let side = cross(&(b - a), &(self.center - a));
            if self.alphas[i] < PI / 2.0 - 1e-9 && (side > 0.0) != (self.eps[i] > 0) {
                return Err(format!("eps {i} disagrees with geometry"));
            }
        }
        let wind: f64 = self
            .eps
            .iter()
            .zip(&self.alphas)
            .map(|(&e, &a)| e as f64 * a)
            .sum::<f64>()
            / PI;
        if (wind - self.winding as f64).abs() > 1e-8 {
            return Err(format!("winding {} vs {}", wind, self.winding));
        }
        if self.positive != self.eps.iter().filter(|&&e| e > 0).count() {
            return Err("positive count wrong".into());
        }
        Ok(())
    }
}

/// Sampling controls for the circumradius root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootGrid {
    pub samples: usize,
    /// Bisection stops when the bracket is below this fraction of the radius.
    pub bisect_rel: f64,
}

impl Default for RootGrid {
    fn default() -> Self {
        Self {
            samples: 10_000,
            bisect_rel: 1e-13,
        }
    }
}

fn validate(lengths: &[f64]) -> Result<(), GeomError> {
    if lengths.len() < 3 {
        return Err(GeomError::InvalidInput(format!(
            "need at least 3 edges, got {}",
            lengths.len()
        )));
    }
    if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(GeomError::InvalidInput("edge lengths must be positive".into()));
    }
    let total: f64 = lengths.iter().sum();
    for &l in lengths {
        if l > total - l + 1e-12 * total {
            return Err(GeomError::InvalidInput(format!(
                "edge {l} exceeds the sum of the others"
            )));
        }
    }
    Ok(())
}

/// Cyclic polygons with the given edge signs and winding number.
///
/// Every root of `sum eps_i asin(l_i / 2R) = pi * omega` gives one polygon,
/// so the result may contain several; an empty solution set is
/// [`GeomError::NoSolution`].
pub fn solve_cyclic(lengths: &[f64], eps: &[i8], omega: i32) -> Result<Vec<CyclicPolygon>, GeomError> {
    solve_cyclic_with(lengths, eps, omega, RootGrid::default())
}

pub fn solve_cyclic_with(
    lengths: &[f64],
    eps: &[i8],
    omega: i32,
    grid: RootGrid,
) -> Result<Vec<CyclicPolygon>, GeomError> {
    validate(lengths)?;
    if eps.len() != lengths.len() || eps.iter().any(|&e| e != 1 && e != -1) {
        return Err(GeomError::InvalidInput("eps must be a +-1 vector per edge".into()));
    }
    let radii = radius_roots(lengths, eps, omega, grid);
    let out: Vec<CyclicPolygon> = radii
        .into_iter()
        .filter_map(|r| build_polygon(lengths, eps, omega, r))
        .collect();
    if out.is_empty() {
        Err(GeomError::NoSolution)
    } else {
        Ok(out)
    }
}

fn winding_residual(lengths: &[f64], eps: &[i8], omega: i32, r: f64) -> f64 {
    lengths
        .iter()
        .zip(eps)
        .map(|(&l, &e)| e as f64 * (l / (2.0 * r)).min(1.0).asin())
        .sum::<f64>()
        - PI * omega as f64
}

fn radius_roots(lengths: &[f64], eps: &[i8], omega: i32, grid: RootGrid) -> Vec<f64> {
    let lmax = lengths.iter().cloned().fold(0.0, f64::max);
    let total: f64 = lengths.iter().sum();
    let r_min = lmax / 2.0;
    let f = |r: f64| winding_residual(lengths, eps, omega, r);

    // Beyond r_hi the residual cannot change sign: for omega != 0 the angle sum
    // is below pi, for omega == 0 the linear term of asin dominates.
    let r_hi = if omega != 0 {
        (total / 4.0).max(r_min)
    } else {
        let signed: f64 = lengths.iter().zip(eps).map(|(&l, &e)| e as f64 * l).sum();
        let ratio = if signed.abs() > 0.0 {
            (0.2 * total / signed.abs()).sqrt()
        } else {
            1e6
        };
        1.5 * lmax.max(0.5 * lmax * ratio).min(1e6 * lmax)
    };

    let mut roots = Vec::new();
    let f_min = f(r_min);
    if f_min.abs() < 1e-12 {
        roots.push(r_min);
    }
    if r_hi <= r_min {
        return roots;
    }
    // offsets from r_min, log spaced so the square-root singularity at r_min
    // is resolved
    let span = r_hi - r_min;
    let lo = (1e-12 * r_min).max(f64::MIN_POSITIVE);
    let n = grid.samples.max(2);
    let ratio = (span / lo).ln();
    let mut prev_r = r_min;
    let mut prev_f = f_min;
    for k in 0..n {
        let r = r_min + lo * (ratio * k as f64 / (n - 1) as f64).exp();
        let fr = f(r);
        if fr == 0.0 {
            roots.push(r);
        } else if prev_f != 0.0 && (fr > 0.0) != (prev_f > 0.0) {
            roots.push(bisect(&f, prev_r, r, prev_f, grid.bisect_rel));
        }
        prev_r = r;
        prev_f = fr;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * *b);
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, rel: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= rel * m {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn build_polygon(lengths: &[f64], eps: &[i8], omega: i32, radius: f64) -> Option<CyclicPolygon> {
    let n = lengths.len();
    let alphas: Vec<f64> = lengths
        .iter()
        .map(|&l| (l / (2.0 * radius)).min(1.0).asin())
        .collect();
    let mut phi: f64 = 0.0;
    let mut vertices = Vec::with_capacity(n);
    for i in 0..n {
        vertices.push(Point::new(radius * phi.cos(), radius * phi.sin()));
        phi += 2.0 * eps[i] as f64 * alphas[i];
    }
    let closing = Point::new(radius * phi.cos(), radius * phi.sin());
    let total: f64 = lengths.iter().sum();
    if (closing - vertices[0]).norm() > 1e-9 * total {
        return None;
    }
    Some(CyclicPolygon {
        lengths: lengths.to_vec(),
        center: Point::zeros(),
        radius,
        vertices,
        eps: eps.to_vec(),
        alphas,
        winding: omega,
        positive: eps.iter().filter(|&&e| e > 0).count(),
    })
}

/// All cyclic configurations of a polygonal linkage up to orientation
/// preserving isometries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicEnumeration {
    pub polygons: Vec<CyclicPolygon>,
    /// Non-fatal genericity notes (coinciding solutions, zero winding).
    pub warnings: Vec<String>,
}

/// Sweeps every sign vector and winding number. Results are ordered by
/// `(eps bitmask, omega, radius)`.
pub fn enumerate_cyclic(lengths: &[f64]) -> Result<CyclicEnumeration, GeomError> {
    validate(lengths)?;
    let n = lengths.len();
    if n > 24 {
        return Err(GeomError::InvalidInput("too many edges to enumerate sign vectors".into()));
    }
    let max_w = (n / 2) as i32;
    let cells: Vec<(u64, i32)> = (0..1u64 << n)
        .flat_map(|m| (-max_w..=max_w).map(move |w| (m, w)))
        .collect();
    let found: Vec<Vec<CyclicPolygon>> = cells
        .par_iter()
        .map(|&(mask, w)| {
            let eps: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            solve_cyclic(lengths, &eps, w).unwrap_or_default()
        })
        .collect();

    let total: f64 = lengths.iter().sum();
    let mut warnings = Vec::new();
    let mut polygons: Vec<CyclicPolygon> = Vec::new();
    for p in found.into_iter().flatten() {
        if let Some(q) = polygons.iter().find(|q| {
            q.vertices
                .iter()
                .zip(&p.vertices)
                .all(|(a, b)| (a - b).norm() <= 1e-9 * total)
        }) {
            warnings.push(format!(
                "coinciding solutions for eps masks {:#b} and {:#b}",
                q.eps_mask(),
                p.eps_mask()
            ));
            continue;
        }
        if p.winding == 0 {
            warnings.push(format!(
                "winding number zero solution for eps mask {:#b}",
                p.eps_mask()
            ));
        }
        polygons.push(p);
    }
    Ok(CyclicEnumeration { polygons, warnings })
}

/// Circle data of the cycle in a configuration.
///
/// The circle passes exactly through the best-conditioned vertex triple; the
/// rest must lie within `tol * R` of it.
pub fn circle_data(
    c: &Configuration,
    cycle: &DistinguishedCycle,
    tol: f64,
) -> Result<CyclicPolygon, GeomError> {
    circle_data_points(&c.points(cycle.vertices())?, tol)
}

pub(crate) fn circle_data_points(pts: &[Point], tol: f64) -> Result<CyclicPolygon, GeomError> {
    let n = pts.len();
    if n < 3 {
        return Err(GeomError::InvalidInput("cycle needs at least 3 vertices".into()));
    }
    // anchor at vertex 0, farthest vertex, then the one farthest from that line
    let j = (1..n)
        .max_by(|&a, &b| {
            (pts[a] - pts[0])
                .norm()
                .partial_cmp(&(pts[b] - pts[0]).norm())
                .unwrap()
        })
        .unwrap();
    let k = (1..n)
        .filter(|&k| k != j)
        .max_by(|&a, &b| {
            cross(&(pts[j] - pts[0]), &(pts[a] - pts[0]))
                .abs()
                .partial_cmp(&cross(&(pts[j] - pts[0]), &(pts[b] - pts[0])).abs())
                .unwrap()
        })
        .unwrap();
    let center = super::circumcenter(&pts[0], &pts[j], &pts[k])
        .ok_or(GeomError::NotConcyclic { deviation: f64::INFINITY })?;
    let radius = (pts[0] - center).norm();
    let deviation = pts
        .iter()
        .map(|p| ((p - center).norm() - radius).abs())
        .fold(0.0, f64::max);
    if deviation > tol * radius {
        return Err(GeomError::NotConcyclic { deviation });
    }
    let mut lengths = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    let mut alphas = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let l = (b - a).norm();
        let side = cross(&(b - a), &(center - a));
        if l == 0.0 || (side / l).abs() <= tol * radius {
            return Err(GeomError::DegenerateCenter { edge: i });
        }
        let (u, v) = (a - center, b - center);
        let angle = cross(&u, &v).abs().atan2(u.dot(&v));
        lengths.push(l);
        eps.push(if side > 0.0 { 1 } else { -1 });
        alphas.push(angle / 2.0);
    }
    let wind: f64 = eps.iter().zip(&alphas).map(|(&e, &a)| e as f64 * a).sum::<f64>() / PI;
    let winding = wind.round() as i32;
    if (wind - winding as f64).abs() > 1e-6 {
        return Err(GeomError::NotConcyclic { deviation });
    }
    Ok(CyclicPolygon {
        lengths,
        center,
        radius,
        vertices: pts.to_vec(),
        positive: eps.iter().filter(|&&e| e > 0).count(),
        eps,
        alphas,
        winding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Linkage;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn heron(a: f64, b: f64, c: f64) -> f64 {
        let s = 0.5 * (a + b + c);
        (s * (s - a) * (s - b) * (s - c)).sqrt()
    }

    #[test]
    fn equilateral_triangle() {
        let sols = solve_cyclic(&[1.0; 3], &[1, 1, 1], 1).unwrap();
        assert_eq!(sols.len(), 1);
        assert_relative_eq!(sols[0].radius, 1.0 / 3f64.sqrt(), max_relative = 1e-12);
        sols[0].check_invariants(1e-9).unwrap();
    }

    #[test]
    fn unit_square() {
        let sols = solve_cyclic(&[1.0; 4], &[1; 4], 1).unwrap();
        assert_relative_eq!(sols[0].radius, 2f64.sqrt() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(sols[0].area(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn scalene_triangle_matches_heron() {
        // abc / 4K with K from Heron's formula, computed independently
        let frozen = 1.0327955589886446;
        // obtuse: the center lies beyond the long side, so winding is zero
        assert!(matches!(
            solve_cyclic(&[2.0, 1.5, 1.0], &[1, 1, 1], 1),
            Err(GeomError::NoSolution)
        ));
        let sols = solve_cyclic(&[2.0, 1.5, 1.0], &[-1, 1, 1], 0).unwrap();
        assert_eq!(sols.len(), 1);
        assert!((sols[0].radius - frozen).abs() <= 1e-9);
        sols[0].check_invariants(1e-9).unwrap();
        let acute = solve_cyclic(&[1.2, 1.5, 1.0], &[1, 1, 1], 1).unwrap();
        assert!((acute[0].radius - 1.2 * 1.5 * 1.0 / (4.0 * heron(1.2, 1.5, 1.0))).abs() <= 1e-9);
    }

    #[test]
    fn impossible_inputs() {
        assert!(matches!(
            solve_cyclic(&[1.0, 1.0, 3.0], &[1, 1, 1], 1),
            Err(GeomError::InvalidInput(_))
        ));
        assert!(matches!(
            solve_cyclic(&[1.0, 1.0, 1.0], &[1, 1, 1], -1),
            Err(GeomError::NoSolution)
        ));
        assert!(solve_cyclic(&[1.0, 1.0], &[1, 1], 1).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let tri = enumerate_cyclic(&[1.0; 3]).unwrap();
        assert_eq!(tri.polygons.len(), 2);
        let sq = enumerate_cyclic(&[1.0; 4]).unwrap();
        assert!(sq.polygons.iter().any(|p| p.eps == vec![1; 4] && p.winding == 1));
        assert!(sq.polygons.iter().any(|p| p.eps == vec![-1; 4] && p.winding == -1));
        // dense sign-change sweep of the winding residual over (eps, omega),
        // frozen
        let penta = enumerate_cyclic(&[1.0; 5]).unwrap();
        assert_eq!(penta.polygons.len(), 14);
        for p in &penta.polygons {
            p.check_invariants(1e-9).unwrap();
            assert!(p.closure_residual() <= 1e-9 * 5.0);
        }
    }

    #[test]
    fn circle_data_of_square() {
        let l = Linkage::polygon(&[1.0; 4]).unwrap();
        let gamma = l.gamma.unwrap();
        let mut c = Configuration::new();
        for (i, (x, y)) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].iter().enumerate() {
            c.insert(format!("v{i}"), Point::new(*x, *y));
        }
        let p = circle_data(&c, &gamma, 1e-8).unwrap();
        assert_relative_eq!(p.center, Point::new(0.5, 0.5), epsilon = 1e-12);
        assert_relative_eq!(p.radius, 2f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_eq!(p.eps, vec![1; 4]);
        assert_eq!(p.winding, 1);
        assert_eq!(p.positive, 4);
        for a in &p.alphas {
            assert_relative_eq!(*a, PI / 4.0, epsilon = 1e-12);
        }
        let cw = circle_data(&c, &gamma.reversed(), 1e-8).unwrap();
        assert_eq!(cw.eps, vec![-1; 4]);
        assert_eq!(cw.winding, -1);
        assert_eq!(cw.positive, 0);

        c.insert("v2", Point::new(1.0 + 1e-3, 1.0));
        assert!(matches!(
            circle_data(&c, &gamma, 1e-6),
            Err(GeomError::NotConcyclic { .. })
        ));
    }

    proptest! {
        #[test]
        fn solve_then_measure_round_trip(
            lengths in prop::collection::vec(0.5f64..2.0, 3..7),
            mask in 0u64..64,
        ) {
            let n = lengths.len();
            let eps: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            for w in -(n as i32 / 2)..=(n as i32 / 2) {
                let Ok(sols) = solve_cyclic(&lengths, &eps, w) else { continue };
                for p in sols {
                    prop_assert!(p.check_invariants(1e-9).is_ok());
                    if p.alphas.iter().any(|a| (PI / 2.0 - a).abs() < 1e-6) {
                        continue;
                    }
                    let back = circle_data_points(&p.vertices, 1e-8).unwrap();
                    prop_assert_eq!(&back.eps, &p.eps);
                    prop_assert_eq!(back.winding, p.winding);
                    prop_assert_eq!(back.positive, p.positive);
                    prop_assert!((back.radius - p.radius).abs() <= 1e-9 * p.radius);
                }
            }
        }
    }
}
