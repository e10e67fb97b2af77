//! Quadrature weights for the speed-functional integral.
//!
//! The integrand `(u + psi)^2 min(e^s, 1)` has a kink at `s = 0`, so the rule
//! is composite Simpson applied separately on each half of the symmetric
//! grid, sharpened by one step of Richardson extrapolation against the
//! two-cell-coarse Simpson rule. On the profile defaults this evaluates the
//! left-tail test integrals to a few 1e-9, where plain trapezoid is off by
//! a few 1e-4.

use crate::grid::Grid;

fn simpson_weights(m: usize, h: f64, out: &mut [f64], stride: usize) {
    // composite Simpson over m points (m odd), written with the given stride
    debug_assert!(m % 2 == 1);
    out[0] += h / 3.0;
    out[(m - 1) * stride] += h / 3.0;
    for j in 1..m - 1 {
        out[j * stride] += h / 3.0 * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
}

/// Weights `q` with `sum_i q_i g(x_i) ~ int_{-L}^{L} g`, exact split at the
/// midpoint `x = 0`. Requires `(n - 1) % 8 == 0` so both Simpson levels see
/// odd point counts on each half (true for the profile defaults 2401 and
/// 4801).
pub fn profile_weights(grid: &Grid) -> Vec<f64> {
    let n = grid.n;
    assert!(
        (n - 1) % 8 == 0,
        "quadrature needs (n - 1) divisible by 8, got n = {n}"
    );
    let mid = grid.mid();
    let h = grid.h;
    let mut fine = vec![0.0; n];
    let mut coarse = vec![0.0; n];
    for start in [0, mid] {
        let m = mid + 1;
        simpson_weights(m, h, &mut fine[start..], 1);
        simpson_weights((m + 1) / 2, 2.0 * h, &mut coarse[start..], 2);
    }
    fine.iter()
        .zip(&coarse)
        .map(|(f, c)| (16.0 * f - c) / 15.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_kinked_exponential() {
        // int_{-60}^{60} e^{-|s|} (e^{2 min(s,0)}) ds -> left e^{3s}, right e^{-s}
        let g = Grid::new(60.0, 2401);
        let q = profile_weights(&g);
        let mut acc = 0.0;
        for i in 0..g.n {
            let x = g.x(i);
            let v = (-x.abs()).exp() * (2.0 * x.min(0.0)).exp();
            acc += q[i] * v;
        }
        let exact = 1.0 / 3.0 + 1.0; // 1/3 + (1 - e^-60) ~ 4/3
        assert!((acc - exact).abs() < 1e-8, "err {}", (acc - exact).abs());
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let g = Grid::new(60.0, 2401);
        let q = profile_weights(&g);
        let s: f64 = q.iter().sum();
        assert!((s - 120.0).abs() < 1e-10);
    }
}
