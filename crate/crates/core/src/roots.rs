//! Bracketing root finder for the monotone Moran-type equations.

/// Bisection for a root of a strictly decreasing `f` on `[lo, ∞)`.
///
/// The upper end of the bracket is found by doubling from `initial_hi` until
/// `f(hi) <= 0`. If already `f(lo) <= 0` the boundary `lo` is returned.
/// Iterates until the bracket is shorter than `tol`.
pub fn decreasing_root<F: Fn(f64) -> f64>(f: F, lo: f64, initial_hi: f64, tol: f64) -> f64 {
    let mut lo = lo;
    if f(lo) <= 0.0 {
        return lo;
    }
    let mut hi = initial_hi.max(lo + tol);
    let mut guard = 0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        assert!(guard < 2000, "no sign change found for decreasing function");
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let r = decreasing_root(|x| 2.0 - x, 0.0, 1.0, 1e-12);
        assert!((r - 2.0).abs() < 1e-12);
        let r = decreasing_root(|x| 1.0 - x * x * x, 0.0, 0.25, 1e-13);
        assert!((r - 1.0).abs() < 1e-12);
        assert_eq!(decreasing_root(|x| -1.0 - x, 0.0, 1.0, 1e-12), 0.0);
    }
}
