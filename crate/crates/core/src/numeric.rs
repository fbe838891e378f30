//! Shared tolerances and scalar root finding.

/// Tolerance for orthogonality and equivariance decisions.
pub const TOL: f64 = 1e-9;

/// Tolerance for unit-norm invariants.
pub const UNIT_TOL: f64 = 1e-12;

/// Finds a root of `f` on `[lo, hi]` by bisection. Requires a sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < tol {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(t: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = t.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}
