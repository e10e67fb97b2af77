//! Solution diagnostics: the weighted Hoelder-norm estimate and exponential
//! tail fits.

use crate::cutoff;
use crate::grid::Grid;
use crate::profile::ProfileError;

/// Fitted and predicted exponential decay rates of the two tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub gamma_plus_fit: f64,
    pub gamma_minus_fit: f64,
    pub gamma_plus_pred: f64,
    pub gamma_minus_pred: f64,
}

/// Discrete Hoelder seminorm estimate `sup |g(x) - g(y)| / |x - y|^alpha`,
/// sampled over adjacent pairs and dyadic separations `h 2^j`, `j = 0..10`.
pub fn holder_seminorm(vals: &[f64], h: f64, alpha: f64) -> f64 {
    let n = vals.len();
    let mut worst: f64 = 0.0;
    for j in 0..=10u32 {
        let sep = 1usize << j;
        if sep >= n {
            break;
        }
        let denom = (sep as f64 * h).powf(alpha);
        for i in 0..n - sep {
            let q = (vals[i + sep] - vals[i]).abs() / denom;
            worst = worst.max(q);
        }
    }
    worst
}

/// Finite-difference weights on equispaced nodes `offsets * h` for the
/// derivative of order `m` evaluated at offset `z` (Fornberg's recursion).
fn fd_weights(z: f64, offsets: &[f64], m: usize) -> Vec<f64> {
    let n = offsets.len();
    // c[k][j]: weight of node j for derivative order k
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = offsets[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i] - z;
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = ((offsets[i] - z) * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = (offsets[i] - z) * c[0][j] / c3;
        }
        c1 = c2;
    }
    c[m].clone()
}

/// First and second derivatives of sampled values on a uniform grid, using
/// eight-point stencils that never straddle one of the `kinks` (grid
/// indices where higher derivatives of the sampled function jump). Eight
/// points keep the stencils exact for the quintic cutoff with enough slack
/// that even the end-node one-sided second-derivative weights stay accurate;
/// the windows are shifted one-sided near kinks and boundaries, centered
/// elsewhere.
pub fn derivatives_kink_aware(vals: &[f64], h: f64, kinks: &[usize]) -> (Vec<f64>, Vec<f64>) {
    const W: usize = 8;
    let n = vals.len();
    assert!(n >= W);
    let offsets: Vec<f64> = (0..W).map(|k| k as f64).collect();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    // weight cache per evaluation position z = 0..W-1 within the window
    let w1: Vec<Vec<f64>> = (0..W).map(|z| fd_weights(z as f64, &offsets, 1)).collect();
    let w2: Vec<Vec<f64>> = (0..W).map(|z| fd_weights(z as f64, &offsets, 2)).collect();
    for i in 0..n {
        // prefer the centered window, clipped into the grid
        let mut a = i.saturating_sub(W / 2 - 1).min(n - W);
        let mut b = a + W - 1;
        for &k in kinks {
            // the window may touch a kink node but not contain both strict
            // sides of it
            if a < k && k < b {
                if i <= k {
                    b = k;
                    a = b + 1 - W;
                } else {
                    a = k;
                    b = a + W - 1;
                }
            }
        }
        debug_assert!(b < n && i >= a && i <= b);
        let z = i - a;
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 0..W {
            s1 += w1[z][k] * vals[a + k];
            s2 += w2[z][k] * vals[a + k];
        }
        d1[i] = s1 / h;
        d2[i] = s2 / (h * h);
    }
    (d1, d2)
}

/// Estimate of the weighted norm `|p|_inf + |p'|_inf + |p''|_inf +
/// [p'']_alpha` for `p = mu u`, `mu(x) = 1 + x^2`.
///
/// The derivatives respect the two points where the cutoff is only C^2
/// (`x = 0` and `x = 1`), so the estimate is stable under grid refinement.
pub fn weighted_norm(u: &[f64], grid: &Grid, alpha: f64) -> f64 {
    let n = grid.n;
    let p: Vec<f64> = (0..n).map(|i| cutoff::mu(grid.x(i)) * u[i]).collect();
    let mut kinks = vec![grid.mid()];
    let one = grid.mid() + (1.0 / grid.h).round() as usize;
    if (grid.x(one.min(n - 1)) - 1.0).abs() < 1e-12 {
        kinks.push(one);
    }
    let (p1, p2) = derivatives_kink_aware(&p, grid.h, &kinks);
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    sup(&p) + sup(&p1) + sup(&p2) + holder_seminorm(&p2, grid.h, alpha)
}

/// Least-squares slope of `ln(vals)` over the window where `vals` lies in
/// `(lo, hi)`; `sign` flips the abscissa for the left tail.
fn log_slope(xs: &[f64], vals: &[f64], lo: f64, hi: f64) -> Result<f64, ProfileError> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(vals)
        .filter(|(_, &v)| v > lo && v < hi)
        .map(|(&x, &v)| (x, v.ln()))
        .collect();
    if pts.len() < 20 {
        return Err(ProfileError::TailTooShort { points: pts.len() });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Fit the exponential tail rates: slope of `ln w` where `w` crosses
/// `(1e-8, 1e-3)` on the right, slope of `ln (1 - w)` on the mirrored left
/// window. Returns `(gamma_plus, gamma_minus)`, both positive for a
/// decreasing front.
pub fn decay_fit(w: &[f64], one_minus_w: &[f64], grid: &Grid) -> Result<(f64, f64), ProfileError> {
    let xs = grid.xs();
    let mid = grid.mid();
    let right = log_slope(&xs[mid..], &w[mid..], 1e-8, 1e-3)?;
    let left = log_slope(&xs[..mid], &one_minus_w[..mid], 1e-8, 1e-3)?;
    Ok((-right, left))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holder_bound_of_c1_functions() {
        // [p]_alpha <= max(2 |p|_inf, |p'|_inf) for alpha in (0, 1)
        let g = Grid::new(60.0, 2401);
        for (f, df) in [
            (
                (|x: f64| x.sin()) as fn(f64) -> f64,
                (|x: f64| x.cos()) as fn(f64) -> f64,
            ),
            (|x: f64| (-x * x / 8.0).exp(), |x: f64| {
                -x / 4.0 * (-x * x / 8.0).exp()
            }),
            (|x: f64| 1.0 / (1.0 + x * x), |x: f64| {
                -2.0 * x / ((1.0 + x * x) * (1.0 + x * x))
            }),
        ] {
            let vals: Vec<f64> = (0..g.n).map(|i| f(g.x(i))).collect();
            let sup_p = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let sup_dp = (0..g.n).map(|i| df(g.x(i)).abs()).fold(0.0f64, f64::max);
            for alpha in [0.25, 0.5, 0.75] {
                let est = holder_seminorm(&vals, g.h, alpha);
                let bound = (2.0 * sup_p).max(sup_dp);
                assert!(
                    est <= bound * (1.0 + 1e-12),
                    "alpha {alpha}: estimate {est} > bound {bound}"
                );
            }
        }
    }

    #[test]
    fn weighted_norm_homogeneous_and_zero() {
        let g = Grid::new(60.0, 2401);
        let u: Vec<f64> = (0..g.n).map(|i| (-g.x(i).abs()).exp()).collect();
        let u2: Vec<f64> = u.iter().map(|v| 2.0 * v).collect();
        let n1 = weighted_norm(&u, &g, 0.5);
        let n2 = weighted_norm(&u2, &g, 0.5);
        assert!((n2 - 2.0 * n1).abs() < 1e-9 * n1.max(1.0));
        assert_eq!(weighted_norm(&vec![0.0; g.n], &g, 0.5), 0.0);
        assert!(n1.is_finite() && n1 > 0.0);
    }

    #[test]
    fn decay_fit_recovers_exact_exponential_rates() {
        let g = Grid::new(60.0, 2401);
        let gp = 0.37;
        let gm = 1.1;
        let mut w = vec![0.0; g.n];
        let mut omw = vec![0.0; g.n];
        for i in 0..g.n {
            let x = g.x(i);
            if x >= 0.0 {
                w[i] = 0.5 * (-gp * x).exp();
                omw[i] = 1.0 - w[i];
            } else {
                omw[i] = 0.5 * (gm * x).exp();
                w[i] = 1.0 - omw[i];
            }
        }
        let (fit_p, fit_m) = decay_fit(&w, &omw, &g).unwrap();
        assert!((fit_p - gp).abs() < 1e-10, "{fit_p}");
        assert!((fit_m - gm).abs() < 1e-10, "{fit_m}");
    }

    #[test]
    fn short_tail_reported() {
        let g = Grid::new(5.0, 201);
        let w: Vec<f64> = (0..g.n).map(|i| 0.5 * (-0.3 * g.x(i)).exp().min(1.0)).collect();
        let omw: Vec<f64> = w.iter().map(|v| 1.0 - v).collect();
        match decay_fit(&w, &omw, &g) {
            Err(ProfileError::TailTooShort { .. }) => {}
            other => panic!("expected TailTooShort, got {other:?}"),
        }
    }
}
