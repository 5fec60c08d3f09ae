//! Small dense-vector helpers used throughout the solver.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Normalize `x` in place; returns the original norm. Leaves `x` untouched
/// when its norm is zero.
pub fn normalize(x: &mut [f64]) -> f64 {
    let n = norm2(x);
    if n > 0.0 {
        scale(1.0 / n, x);
    }
    n
}

/// Real roots of a t^2 + 2 b t + c = 0, ordered ascending. Computes the
/// larger-magnitude root first and the companion via c/(a r) to avoid
/// cancellation. Degenerate-linear inputs (a ~ 0) fall back to the linear
/// root; discriminants negative within roundoff clamp to zero; `None` means
/// genuinely no real root.
pub fn stable_quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    if a.abs() <= 1e-14 * (b.abs() + c.abs()).max(1.0) {
        if b.abs() <= 1e-300 {
            return None;
        }
        let r = -c / (2.0 * b);
        return Some((r, r));
    }
    let mut disc = b * b - a * c;
    if disc < 0.0 {
        if disc > -1e-12 * (b * b + (a * c).abs()).max(1e-300) {
            disc = 0.0;
        } else {
            return None;
        }
    }
    let sq = disc.sqrt();
    let r1 = if b >= 0.0 { (-b - sq) / a } else { (-b + sq) / a };
    let r2 = if r1 != 0.0 { c / (a * r1) } else { -2.0 * b / a };
    Some((r1.min(r2), r1.max(r2)))
}
