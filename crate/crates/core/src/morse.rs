//! Closed-form Morse and Bott-Morse indices.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{cross, points_aligned, CyclicPolygon, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorseError {
    #[error("chain is not aligned")]
    NotAligned,
    #[error("sign test is too close to zero ({sum:e} against scale {scale:e})")]
    NonGeneric { sum: f64, scale: f64 },
    #[error("edge {edge} is a diameter; the tangent sum diverges towards sign {limit_sign}")]
    Degenerate { edge: usize, limit_sign: i8 },
    #[error("circumcenters coincide")]
    CoincidingCenters,
    #[error("invalid chain data: {0}")]
    InvalidChain(String),
}

/// An aligned open chain: `r` edges, `f` of them pointing along `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenChainCritical {
    pub r: usize,
    pub f: usize,
    /// Endpoint-to-endpoint direction of the aligned chain.
    pub w: Point,
}

impl OpenChainCritical {
    pub fn new(r: usize, f: usize, w: Point) -> Result<Self, MorseError> {
        if r == 0 || f == 0 || f > r {
            return Err(MorseError::InvalidChain(format!("r = {r}, f = {f}")));
        }
        if w.norm() == 0.0 {
            return Err(MorseError::InvalidChain("zero endpoint vector".into()));
        }
        Ok(Self { r, f, w })
    }

    /// Reads `r`, `f` and `W` off the vertices of a chain.
    pub fn from_points(points: &[Point], tol: f64) -> Result<Self, MorseError> {
        if points.len() < 2 {
            return Err(MorseError::InvalidChain("chain needs two vertices".into()));
        }
        if !points_aligned(points, tol) {
            return Err(MorseError::NotAligned);
        }
        let w = points[points.len() - 1] - points[0];
        let f = points
            .windows(2)
            .filter(|p| (p[1] - p[0]).dot(&w) > 0.0)
            .count();
        Self::new(points.len() - 1, f, w)
    }

    /// Signed length `sum s_k c_k` for a chain laid out by signs.
    pub fn from_signs(lengths: &[f64], signs: &[i8]) -> Result<Self, MorseError> {
        let w: f64 = lengths.iter().zip(signs).map(|(&l, &s)| s as f64 * l).sum();
        if w <= 0.0 {
            return Err(MorseError::InvalidChain(format!("signed length {w} not positive")));
        }
        let f = signs.iter().filter(|&&s| s > 0).count();
        Self::new(lengths.len(), f, Point::new(w, 0.0))
    }
}

/// Index of the endpoint distance at an aligned chain.
pub fn open_chain_index(crit: &OpenChainCritical) -> usize {
    crit.f - 1
}

/// Index of the area at a cyclic polygon, `e - 1 - 2w` or `e - 2 - 2w`
/// depending on the sign of `sum eps_i tan(alpha_i)`.
pub fn cyclic_index(p: &CyclicPolygon) -> Result<i64, MorseError> {
    let sign = tangent_sign(p)?;
    let e = p.positive as i64;
    let w = p.winding as i64;
    Ok(if sign > 0 { e - 1 - 2 * w } else { e - 2 - 2 * w })
}

/// Sign of `sum eps_i tan(alpha_i)`, guarded against near-zero sums.
pub fn tangent_sign(p: &CyclicPolygon) -> Result<i8, MorseError> {
    const DIAMETER: f64 = 1e-12;
    if let Some(edge) = p
        .alphas
        .iter()
        .position(|a| std::f64::consts::FRAC_PI_2 - a < DIAMETER)
    {
        return Err(MorseError::Degenerate { edge, limit_sign: p.eps[edge] });
    }
    let terms: Vec<f64> = p
        .alphas
        .iter()
        .zip(&p.eps)
        .map(|(a, &e)| e as f64 * a.tan())
        .collect();
    let sum: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if sum.abs() < 1e-7 * scale {
        return Err(MorseError::NonGeneric { sum, scale });
    }
    Ok(if sum > 0.0 { 1 } else { -1 })
}

/// True when `mu` fits in a reduced polygon space of dimension `n - 3`.
pub fn index_in_polygon_range(mu: i64, n: usize) -> bool {
    mu >= 0 && mu <= n as i64 - 3
}

/// Contribution of an aligned chain hinged between two circumscribed circles
/// with centers `oa` and `ob`.
///
/// `oa` is the center of the cell that runs along the chain's diagonal from
/// its far end back to its start, `ob` the center of the cell that runs
/// along it forwards.
pub fn aligned_nu(z: &OpenChainCritical, oa: &Point, ob: &Point, tol: f64) -> Result<usize, MorseError> {
    let d = ob - oa;
    if d.norm() < tol {
        return Err(MorseError::CoincidingCenters);
    }
    Ok(if cross(&z.w, &d) > 0.0 { z.f - 1 } else { z.r - z.f })
}

pub fn three_chain_aligned_index(mu_a: i64, mu_b: i64, nu: i64) -> i64 {
    mu_a + mu_b + nu
}

pub fn ptt_index(cell_indices: &[i64], chain_nus: &[i64]) -> i64 {
    cell_indices.iter().sum::<i64>() + chain_nus.iter().sum::<i64>()
}

/// Lagrange multiplier matrix of the `[2,2;2]` three-chain in the angles
/// `alpha` (between `a1`, `a2`), `beta` (`b1`, `b2`) and `gamma` (`c1`, `c2`).
#[allow(clippy::too_many_arguments)]
pub fn lagrange_matrix_222(
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    c1: f64,
    c2: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Matrix3<f64> {
    let (a, b, c) = (a1 * a2, b1 * b2, c1 * c2);
    Matrix3::new(
        a * alpha.cos(),
        b * beta.cos(),
        0.0,
        2.0 * a * alpha.sin(),
        -2.0 * b * beta.sin(),
        0.0,
        2.0 * a * alpha.sin(),
        0.0,
        -2.0 * c * gamma.sin(),
    )
}

/// Closed form of `det` of [`lagrange_matrix_222`].
#[allow(clippy::too_many_arguments)]
pub fn lagrange_det_222(
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    c1: f64,
    c2: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> f64 {
    4.0 * c1 * c2 * a1 * a2 * b1 * b2 * gamma.sin() * (alpha + beta).sin()
}

/// Index of a critical point or manifold with its per-component breakdown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexReport {
    pub index: i64,
    pub manifold_dim: usize,
    pub breakdown: Vec<(String, i64)>,
}

impl IndexReport {
    pub fn from_parts(breakdown: Vec<(String, i64)>, manifold_dim: usize) -> Self {
        Self {
            index: breakdown.iter().map(|(_, v)| v).sum(),
            manifold_dim,
            breakdown,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{enumerate_cyclic, solve_cyclic};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn open_chain_examples() {
        let x = Point::new(1.0, 0.0);
        assert_eq!(open_chain_index(&OpenChainCritical::new(4, 4, x).unwrap()), 3);
        assert_eq!(open_chain_index(&OpenChainCritical::new(4, 1, x).unwrap()), 0);
        assert_eq!(open_chain_index(&OpenChainCritical::new(3, 2, x).unwrap()), 1);
        assert!(OpenChainCritical::new(3, 0, x).is_err());
        let pts = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(1.0, 0.0), Point::new(3.0, 0.0)];
        let c = OpenChainCritical::from_points(&pts, 1e-9).unwrap();
        assert_eq!((c.r, c.f), (3, 2));
        let bent = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 0.0)];
        assert_eq!(OpenChainCritical::from_points(&bent, 1e-9), Err(MorseError::NotAligned));
    }

    #[test]
    fn cyclic_examples() {
        let tri = &solve_cyclic(&[1.0; 3], &[1; 3], 1).unwrap()[0];
        assert_eq!(cyclic_index(tri).unwrap(), 0);
        let sq = &solve_cyclic(&[1.0; 4], &[1; 4], 1).unwrap()[0];
        assert_eq!(cyclic_index(sq).unwrap(), 1);
        let cw = &solve_cyclic(&[1.0; 4], &[-1; 4], -1).unwrap()[0];
        assert_eq!(cyclic_index(cw).unwrap(), 0);
        // a right triangle has its hypotenuse as a diameter
        let right = &solve_cyclic(&[3.0, 4.0, 5.0], &[1, 1, 1], 1).unwrap()[0];
        assert!(matches!(
            cyclic_index(right),
            Err(MorseError::Degenerate { edge: 2, .. })
        ));
    }

    #[test]
    fn nu_examples() {
        let x = Point::new(1.0, 0.0);
        let up = Point::new(0.0, 1.0);
        let o = Point::zeros();
        let z22 = OpenChainCritical::new(2, 2, x).unwrap();
        assert_eq!(aligned_nu(&z22, &o, &up, 1e-12).unwrap(), 1);
        assert_eq!(aligned_nu(&z22, &up, &o, 1e-12).unwrap(), 0);
        let z31 = OpenChainCritical::new(3, 1, x).unwrap();
        assert_eq!(aligned_nu(&z31, &o, &up, 1e-12).unwrap(), 0);
        assert_eq!(aligned_nu(&z31, &o, &o, 1e-12), Err(MorseError::CoincidingCenters));
    }

    #[test]
    fn sums() {
        assert_eq!(three_chain_aligned_index(0, 0, 1), 1);
        assert_eq!(three_chain_aligned_index(1, 0, 0), 1);
        assert_eq!(ptt_index(&[1, 0, 5], &[1, 1]), 8);
        assert_eq!(ptt_index(&[0, 0], &[0]), 0);
        assert_eq!(ptt_index(&[1], &[]), 1);
        let r = IndexReport::from_parts(vec![("cell 0".into(), 1), ("chain 0".into(), 2)], 0);
        assert_eq!(r.index, 3);
    }

    #[test]
    fn determinant_examples() {
        let t = PI / 3.0;
        let m = lagrange_matrix_222(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, t, t, t);
        assert!((m.determinant() - 3.0).abs() < 1e-12);
        assert!((lagrange_det_222(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, t, t, t) - 3.0).abs() < 1e-12);
        assert_eq!(lagrange_det_222(1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 0.3, 0.4, 0.0), 0.0);
        assert!(lagrange_det_222(1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 0.3, PI - 0.3, 1.0).abs() < 1e-14);
    }

    #[test]
    fn equilateral_pentagon_indices_in_range() {
        for p in enumerate_cyclic(&[1.0; 5]).unwrap().polygons {
            if let Ok(mu) = cyclic_index(&p) {
                assert!(index_in_polygon_range(mu, 5), "{mu} for {:?}", p.eps);
            }
        }
    }

    proptest! {
        #[test]
        fn determinant_closed_form(
            l in prop::array::uniform6(0.1f64..3.0),
            ang in prop::array::uniform3(-PI..PI),
        ) {
            let m = lagrange_matrix_222(l[0], l[1], l[2], l[3], l[4], l[5], ang[0], ang[1], ang[2]);
            let closed = lagrange_det_222(l[0], l[1], l[2], l[3], l[4], l[5], ang[0], ang[1], ang[2]);
            let scale = 4.0 * l.iter().product::<f64>();
            prop_assert!((m.determinant() - closed).abs() <= 1e-12 * scale);
        }
    }
}
