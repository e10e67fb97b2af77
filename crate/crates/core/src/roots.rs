//! Scalar root finding: bisection and bracketed Newton.

/// Bisection on a bracketing interval. Panics if the interval does not
/// bracket a sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let flo = f(lo);
    let fhi = f(hi);
    assert!(
        flo == 0.0 || fhi == 0.0 || (flo > 0.0) != (fhi > 0.0),
        "bisect: [{lo}, {hi}] does not bracket a root ({flo}, {fhi})"
    );
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Newton iteration kept inside `[lo, hi]`, falling back to bisection steps
/// whenever the Newton update leaves the bracket or the derivative degenerates.
/// The bracket must contain a sign change of `f`.
pub fn newton_bracketed(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    x0: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> f64 {
    let mut x = x0.clamp(lo, hi);
    let slo = f(lo) > 0.0;
    for _ in 0..max_iter {
        let fx = f(x);
        if fx.abs() <= tol {
            return x;
        }
        // shrink bracket
        if (fx > 0.0) == slo {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let step = if d != 0.0 { fx / d } else { f64::INFINITY };
        let mut next = x - step;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            return x;
        }
        x = next;
    }
    x
}
