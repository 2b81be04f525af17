use serde::{Deserialize, Serialize};

/// How the four sides sit on the common circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConcyclicShape {
    /// `a1, a2` and `b1, b2` on opposite sides of the diagonal.
    Convex,
    /// Both pairs on the same side.
    Crossed,
}

/// Diagonal length `w` at which the triangles `(a1, a2, w)` and
/// `(b1, b2, w)` glued along `w` share a circumcircle.
pub fn concyclic_diagonal(a1: f64, a2: f64, b1: f64, b2: f64, shape: ConcyclicShape) -> Option<f64> {
    let den = match shape {
        ConcyclicShape::Convex => 2.0 * (a1 * a2 + b1 * b2),
        ConcyclicShape::Crossed => 2.0 * (a1 * a2 - b1 * b2),
    };
    if den.abs() < f64::EPSILON {
        return None;
    }
    let cos_g = (a1 * a1 + a2 * a2 - b1 * b1 - b2 * b2) / den;
    if cos_g.abs() >= 1.0 {
        return None;
    }
    let w2 = a1 * a1 + a2 * a2 - 2.0 * a1 * a2 * cos_g;
    (w2 > 0.0).then(|| w2.sqrt())
}

/// Values of `c1` where an aligned critical point of the `[2,2;2]` linkage
/// `(a1, a2; b1, b2; c1, c2)` has a degenerate Hessian, with the sign
/// pattern of the aligned chain and the circle shape. Sorted by `c1`.
pub fn hessian_zero_parameters_222(a1: f64, a2: f64, b1: f64, b2: f64, c2: f64) -> Vec<(f64, [i8; 2], ConcyclicShape)> {
    let mut out = Vec::new();
    for shape in [ConcyclicShape::Convex, ConcyclicShape::Crossed] {
        let Some(w) = concyclic_diagonal(a1, a2, b1, b2, shape) else { continue };
        for s1 in [1i8, -1] {
            for s2 in [1i8, -1] {
                // s1 c1 + s2 c2 = w
                let c1 = (w - s2 as f64 * c2) / s1 as f64;
                if c1 > 0.0 {
                    out.push((c1, [s1, s2], shape));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}
