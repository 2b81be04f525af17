use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::OracleError;
use crate::geom::{Configuration, Point};
use crate::graph::{DistinguishedCycle, LinkageGraph};

/// Edge-angle coordinates on the configuration space of a linkage.
///
/// Every edge `(u, v)` carries an angle with `p_v - p_u = l (cos t, sin t)`.
/// A spanning tree rooted at `root` fixes positions; every other edge adds a
/// two-dimensional closure constraint.
#[derive(Debug, Clone)]
pub struct AngleChart {
    vertices: Vec<String>,
    ends: Vec<(usize, usize)>,
    lengths: Vec<f64>,
    gauge: usize,
    root: usize,
    in_tree: Vec<bool>,
    /// Positions from stacked edge vectors, `2V x 2E`.
    place: DMatrix<f64>,
    /// Closure residuals from stacked edge vectors, `2m x 2E`.
    closure: DMatrix<f64>,
}

impl AngleChart {
    /// Chart with the lexicographically smallest edge as gauge.
    pub fn new(g: &LinkageGraph) -> Self {
        let gauge = (0..g.edge_count())
            .min_by_key(|&e| {
                let ed = &g.edges()[e];
                let (a, b) = if ed.u <= ed.v { (&ed.u, &ed.v) } else { (&ed.v, &ed.u) };
                (a.clone(), b.clone(), e)
            })
            .expect("linkage graphs have edges");
        Self::with_gauge(g, gauge)
    }

    pub fn with_gauge(g: &LinkageGraph, gauge: usize) -> Self {
        let nv = g.vertex_count();
        let ne = g.edge_count();
        let ends: Vec<(usize, usize)> = (0..ne).map(|e| g.edge_ends(e)).collect();
        let lengths: Vec<f64> = g.edges().iter().map(|e| e.length).collect();
        let root = ends[gauge].0;

        let mut adj = vec![Vec::new(); nv];
        for (e, &(u, v)) in ends.iter().enumerate() {
            adj[u].push(e);
            adj[v].push(e);
        }
        // breadth first, gauge edge first so it is always a tree edge
        let mut in_tree = vec![false; ne];
        let mut place = DMatrix::zeros(2 * nv, 2 * ne);
        let mut seen = vec![false; nv];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        adj[root].sort_by_key(|&e| e != gauge);
        while let Some(x) = queue.pop_front() {
            for &e in &adj[x] {
                let (u, v) = ends[e];
                let (y, sign) = if u == x { (v, 1.0) } else { (u, -1.0) };
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                in_tree[e] = true;
                let row = place.rows(2 * x, 2).into_owned();
                place.rows_mut(2 * y, 2).copy_from(&row);
                place[(2 * y, 2 * e)] += sign;
                place[(2 * y + 1, 2 * e + 1)] += sign;
                queue.push_back(y);
            }
        }

        let chords: Vec<usize> = (0..ne).filter(|&e| !in_tree[e]).collect();
        let mut closure = DMatrix::zeros(2 * chords.len(), 2 * ne);
        for (k, &e) in chords.iter().enumerate() {
            let (u, v) = ends[e];
            let diff = place.rows(2 * v, 2) - place.rows(2 * u, 2);
            closure.rows_mut(2 * k, 2).copy_from(&diff);
            closure[(2 * k, 2 * e)] -= 1.0;
            closure[(2 * k + 1, 2 * e + 1)] -= 1.0;
        }

        Self {
            vertices: g.vertices().to_vec(),
            ends,
            lengths,
            gauge,
            root,
            in_tree,
            place,
            closure,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn gauge(&self) -> usize {
        self.gauge
    }

    pub fn variable_count(&self) -> usize {
        self.edge_count() - 1
    }

    pub fn constraint_count(&self) -> usize {
        self.closure.nrows()
    }

    /// Expected dimension of the reduced configuration space.
    pub fn dimension(&self) -> i64 {
        self.variable_count() as i64 - self.constraint_count() as i64
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.in_tree[e]
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Same chart with one edge length changed.
    pub fn with_length(&self, e: usize, length: f64) -> Self {
        let mut c = self.clone();
        c.lengths[e] = length;
        c
    }

    /// Full angle vector (gauge angle zero) from the free variables.
    pub fn angles(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut t = DVector::zeros(self.edge_count());
        let mut k = 0;
        for e in 0..self.edge_count() {
            if e != self.gauge {
                t[e] = x[k];
                k += 1;
            }
        }
        t
    }

    /// Drops the gauge entry of a per-edge vector.
    pub fn free_part(&self, t: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.variable_count(),
            (0..self.edge_count()).filter(|&e| e != self.gauge).map(|e| t[e]),
        )
    }

    fn drop_gauge_cols(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        m.clone().remove_column(self.gauge)
    }

    pub(crate) fn edge_vectors(&self, t: &DVector<f64>) -> DVector<f64> {
        let mut u = DVector::zeros(2 * self.edge_count());
        for e in 0..self.edge_count() {
            u[2 * e] = self.lengths[e] * t[e].cos();
            u[2 * e + 1] = self.lengths[e] * t[e].sin();
        }
        u
    }

    /// Vertex positions, root at the origin.
    pub fn positions(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.place * self.edge_vectors(&self.angles(x))
    }

    pub fn configuration(&self, x: &DVector<f64>) -> Configuration {
        let p = self.positions(x);
        let mut c = Configuration::new();
        for (i, v) in self.vertices.iter().enumerate() {
            c.insert(v.clone(), Point::new(p[2 * i], p[2 * i + 1]));
        }
        c
    }

    /// Chart coordinates of a configuration; rotates it so that the gauge
    /// edge points along the positive x axis.
    pub fn coordinates(&self, c: &Configuration) -> Result<DVector<f64>, OracleError> {
        let pos = |i: usize| c.get(&self.vertices[i]).map_err(OracleError::Geom);
        let (gu, gv) = self.ends[self.gauge];
        let d = pos(gv)? - pos(gu)?;
        let base = d.y.atan2(d.x);
        let mut t = DVector::zeros(self.edge_count());
        for (e, &(u, v)) in self.ends.iter().enumerate() {
            let d = pos(v)? - pos(u)?;
            t[e] = wrap(d.y.atan2(d.x) - base);
        }
        t[self.gauge] = 0.0;
        Ok(self.free_part(&t))
    }

    /// Closure residuals.
    pub fn constraints(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.closure * self.edge_vectors(&self.angles(x))
    }

    /// Derivative of each edge vector with respect to its angle, as the
    /// columns of a `2E x E` block matrix.
    fn tangents(&self, t: &DVector<f64>) -> DMatrix<f64> {
        let ne = self.edge_count();
        let mut d = DMatrix::zeros(2 * ne, ne);
        for e in 0..ne {
            d[(2 * e, e)] = -self.lengths[e] * t[e].sin();
            d[(2 * e + 1, e)] = self.lengths[e] * t[e].cos();
        }
        d
    }

    pub fn constraint_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let t = self.angles(x);
        self.drop_gauge_cols(&(&self.closure * self.tangents(&t)))
    }

    /// Second-order term `sum_j lambda_j Hess g_j`, diagonal in the angles.
    pub fn constraint_curvature(&self, x: &DVector<f64>, lambda: &DVector<f64>) -> DMatrix<f64> {
        let t = self.angles(x);
        let u = self.edge_vectors(&t);
        let w = self.closure.transpose() * lambda;
        let diag = DVector::from_iterator(
            self.edge_count(),
            (0..self.edge_count()).map(|e| -(w[2 * e] * u[2 * e] + w[2 * e + 1] * u[2 * e + 1])),
        );
        let full = DMatrix::from_diagonal(&diag);
        full.remove_row(self.gauge).remove_column(self.gauge)
    }

    pub fn vertex_index(&self, v: &str) -> Option<usize> {
        self.vertices.iter().position(|x| x == v)
    }

    pub fn root(&self) -> usize {
        self.root
    }
}

pub(crate) fn wrap(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = a.rem_euclid(t);
    if r > std::f64::consts::PI {
        r - t
    } else {
        r
    }
}

/// A quadratic function `F = P^T Q P / 2` of the vertex positions, pulled
/// back to chart coordinates.
#[derive(Debug, Clone)]
pub struct ChartObjective {
    /// `place^T Q place`, acting on stacked edge vectors.
    kernel: DMatrix<f64>,
}

impl ChartObjective {
    pub fn from_position_form(chart: &AngleChart, q: &DMatrix<f64>) -> Self {
        Self {
            kernel: chart.place.transpose() * q * &chart.place,
        }
    }

    /// Oriented area of a cycle.
    pub fn oriented_area(chart: &AngleChart, cycle: &DistinguishedCycle) -> Result<Self, OracleError> {
        let idx = cycle
            .vertices()
            .iter()
            .map(|v| chart.vertex_index(v).ok_or_else(|| OracleError::UnknownVertex(v.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut q = DMatrix::zeros(2 * chart.vertex_count(), 2 * chart.vertex_count());
        let n = idx.len();
        for k in 0..n {
            let (i, j) = (idx[k], idx[(k + 1) % n]);
            // cross(p_i, p_j) = p_i^T J p_j with J = [[0, 1], [-1, 0]]
            q[(2 * i, 2 * j + 1)] += 0.5;
            q[(2 * i + 1, 2 * j)] -= 0.5;
            q[(2 * j + 1, 2 * i)] += 0.5;
            q[(2 * j, 2 * i + 1)] -= 0.5;
        }
        Ok(Self::from_position_form(chart, &q))
    }

    /// Weighted sum of squared distances `sum w |p_a - p_b|^2`, halved.
    pub fn squared_distances(chart: &AngleChart, pairs: &[(usize, usize, f64)]) -> Self {
        let mut q = DMatrix::zeros(2 * chart.vertex_count(), 2 * chart.vertex_count());
        for &(a, b, w) in pairs {
            for k in 0..2 {
                q[(2 * a + k, 2 * a + k)] += w;
                q[(2 * b + k, 2 * b + k)] += w;
                q[(2 * a + k, 2 * b + k)] -= w;
                q[(2 * b + k, 2 * a + k)] -= w;
            }
        }
        Self::from_position_form(chart, &q)
    }

    pub fn value(&self, chart: &AngleChart, x: &DVector<f64>) -> f64 {
        let u = chart.edge_vectors(&chart.angles(x));
        0.5 * u.dot(&(&self.kernel * &u))
    }

    pub fn gradient(&self, chart: &AngleChart, x: &DVector<f64>) -> DVector<f64> {
        let t = chart.angles(x);
        let u = chart.edge_vectors(&t);
        let g = chart.tangents(&t).transpose() * (&self.kernel * u);
        chart.free_part(&g)
    }

    pub fn hessian(&self, chart: &AngleChart, x: &DVector<f64>) -> DMatrix<f64> {
        let t = chart.angles(x);
        let u = chart.edge_vectors(&t);
        let d = chart.tangents(&t);
        let ku = &self.kernel * &u;
        let mut h = d.transpose() * &self.kernel * &d;
        for e in 0..chart.edge_count() {
            h[(e, e)] -= ku[2 * e] * u[2 * e] + ku[2 * e + 1] * u[2 * e + 1];
        }
        h.remove_row(chart.gauge).remove_column(chart.gauge)
    }
}

/// Chart, objective and edge scale bundled for the search routines.
#[derive(Debug, Clone)]
pub struct Problem {
    pub chart: AngleChart,
    pub objective: ChartObjective,
}

impl Problem {
    pub fn area(g: &LinkageGraph, cycle: &DistinguishedCycle) -> Result<Self, OracleError> {
        let chart = AngleChart::new(g);
        let objective = ChartObjective::oriented_area(&chart, cycle)?;
        Ok(Self { chart, objective })
    }

    pub fn scale(&self) -> f64 {
        self.chart.total_length()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::oriented_area;
    use crate::graph::Linkage;

    #[test]
    fn dimensions() {
        let p = Linkage::polygon(&[1.0, 2.0, 1.5, 1.2, 0.9]).unwrap();
        let c = AngleChart::new(&p.graph);
        assert_eq!((c.variable_count(), c.constraint_count(), c.dimension()), (4, 2, 2));
        let tc = Linkage::three_chain(&[1.0, 1.0], &[1.0, 1.2, 0.7], &[1.0, 0.4, 0.5]).unwrap();
        let c = AngleChart::new(&tc.graph);
        assert_eq!((c.variable_count(), c.constraint_count(), c.dimension()), (7, 4, 3));
        let chain = LinkageGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 2.0), ("c", "d", 1.0)]).unwrap();
        let c = AngleChart::new(&chain);
        assert_eq!((c.variable_count(), c.constraint_count(), c.dimension()), (2, 0, 2));
    }

    #[test]
    fn square_positions_and_area() {
        let l = Linkage::polygon(&[1.0; 4]).unwrap();
        let chart = AngleChart::new(&l.graph);
        let mut c = Configuration::new();
        for (i, (x, y)) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].iter().enumerate() {
            c.insert(format!("v{i}"), Point::new(*x, *y));
        }
        let x = chart.coordinates(&c).unwrap();
        assert!(chart.constraints(&x).norm() < 1e-14);
        let back = chart.configuration(&x);
        let gamma = l.gamma.unwrap();
        let obj = ChartObjective::oriented_area(&chart, &gamma).unwrap();
        assert!((obj.value(&chart, &x) - 1.0).abs() < 1e-14);
        assert!((oriented_area(&back, &gamma).unwrap() - 1.0).abs() < 1e-14);
    }
}
