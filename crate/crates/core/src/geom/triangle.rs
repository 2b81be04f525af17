use super::{cross, GeomError, Point};

/// Circumcenter of three points, `None` when they are collinear.
pub fn circumcenter(a: &Point, b: &Point, c: &Point) -> Option<Point> {
    let (ab, ac) = (b - a, c - a);
    let d = 2.0 * cross(&ab, &ac);
    if d.abs() <= f64::EPSILON * (ab.norm_squared() + ac.norm_squared()) {
        return None;
    }
    let (sb, sc) = (ab.norm_squared(), ac.norm_squared());
    Some(a + Point::new(ac.y * sb - ab.y * sc, ab.x * sc - ac.x * sb) / d)
}

/// Derivative of the (unsigned) triangle area with respect to side `c`, with
/// `a` and `b` held fixed.
///
/// Equals `(c/2) cot(gamma)`, which is `+|OM|` for an acute angle `gamma`
/// opposite `c` and `-|OM|` for an obtuse one (`O` circumcenter, `M` midpoint
/// of `c`).
pub fn area_derivative_wrt_side(a: f64, b: f64, c: f64) -> Result<f64, GeomError> {
    let ok = a > 0.0 && b > 0.0 && c > 0.0 && a < b + c && b < a + c && c < a + b;
    if !ok {
        return Err(GeomError::DegenerateTriangle(a, b, c));
    }
    let cos_g = ((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0);
    let sin_g = (1.0 - cos_g * cos_g).sqrt();
    if sin_g == 0.0 {
        return Err(GeomError::DegenerateTriangle(a, b, c));
    }
    Ok(0.5 * c * cos_g / sin_g)
}
