//! Plane configurations, oriented area and the cyclic-polygon machinery.

mod cyclic;
mod reach;
mod triangle;

pub use cyclic::{
    circle_data, enumerate_cyclic, solve_cyclic, solve_cyclic_with, CyclicEnumeration,
    CyclicPolygon, RootGrid,
};
pub(crate) use cyclic::circle_data_points;
pub use reach::{chain_reach, wall_check, ReachInterval, WallHit, WallReport};
pub use triangle::{area_derivative_wrt_side, circumcenter};

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DistinguishedCycle, LinkageGraph};

pub type Point = Vector2<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("vertex {0} has no coordinates")]
    MissingVertex(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no cyclic polygon with these signs and winding number")]
    NoSolution,
    #[error("vertices are not concyclic (max deviation {deviation:e})")]
    NotConcyclic { deviation: f64 },
    #[error("circumcenter lies on the line of edge {edge}")]
    DegenerateCenter { edge: usize },
    #[error("degenerate triangle ({0}, {1}, {2})")]
    DegenerateTriangle(f64, f64, f64),
}

pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed shoelace area of a closed polygon; positive when counterclockwise.
pub fn shoelace(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| cross(&points[i], &points[(i + 1) % n]))
        .sum::<f64>()
        / 2.0
}

/// Coordinates of every vertex of a linkage realization.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Configuration {
    pub coords: BTreeMap<String, Point>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: impl Into<String>, p: Point) {
        self.coords.insert(v.into(), p);
    }

    pub fn get(&self, v: &str) -> Result<Point, GeomError> {
        self.coords
            .get(v)
            .copied()
            .ok_or_else(|| GeomError::MissingVertex(v.to_string()))
    }

    pub fn points<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<Point>, GeomError> {
        ids.iter().map(|v| self.get(v.as_ref())).collect()
    }

    /// Largest relative edge length error, or an error if a vertex is
    /// missing.
    pub fn length_residual(&self, g: &LinkageGraph) -> Result<f64, GeomError> {
        let mut worst: f64 = 0.0;
        for e in g.edges() {
            let d = (self.get(&e.u)? - self.get(&e.v)?).norm();
            worst = worst.max((d - e.length).abs() / e.length);
        }
        Ok(worst)
    }

    pub fn realizes(&self, g: &LinkageGraph, rel_tol: f64) -> bool {
        self.length_residual(g).map(|r| r <= rel_tol).unwrap_or(false)
    }

    /// Applies `p -> rot * p + shift`.
    pub fn transformed(&self, rot: &Matrix2<f64>, shift: &Point) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .map(|(k, p)| (k.clone(), rot * p + shift))
                .collect(),
        }
    }

    /// Mirror image across the x axis.
    pub fn reflected(&self) -> Self {
        self.transformed(&Matrix2::new(1.0, 0.0, 0.0, -1.0), &Point::zeros())
    }

    /// Moves `a` to the origin and rotates so that `b` lies on the positive
    /// x axis. Orientation preserving.
    pub fn normalized(&self, a: &str, b: &str) -> Result<Self, GeomError> {
        let pa = self.get(a)?;
        let d = self.get(b)? - pa;
        let ang = d.y.atan2(d.x);
        let (s, c) = (-ang).sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        Ok(self.transformed(&rot, &(-(rot * pa))))
    }

    pub fn max_distance<S: AsRef<str>>(&self, other: &Self, ids: &[S]) -> Result<f64, GeomError> {
        let mut worst: f64 = 0.0;
        for v in ids {
            worst = worst.max((self.get(v.as_ref())? - other.get(v.as_ref())?).norm());
        }
        Ok(worst)
    }
}

pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Oriented area of the cycle in configuration `c`.
pub fn oriented_area(c: &Configuration, cycle: &DistinguishedCycle) -> Result<f64, GeomError> {
    Ok(shoelace(&c.points(cycle.vertices())?))
}

/// True iff all points lie within `tol` of their least-squares line.
pub fn points_aligned(points: &[Point], tol: f64) -> bool {
    if points.len() <= 2 {
        return true;
    }
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Point>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = p - centroid;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // direction of largest spread; the normal is perpendicular to it
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let normal = Point::new(-theta.sin(), theta.cos());
    points
        .iter()
        .all(|p| normal.dot(&(p - centroid)).abs() <= tol)
}

/// Whether the vertices of `path` fit on one straight line within `tol`.
pub fn is_aligned<S: AsRef<str>>(
    c: &Configuration,
    path: &[S],
    tol: f64,
) -> Result<bool, GeomError> {
    Ok(points_aligned(&c.points(path)?, tol))
}
