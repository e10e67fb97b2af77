//! Lagrange interpolation on uniform grids, used for the shifted argument
//! `w(x + c tau)` and for recentering profiles by non-grid translations.

pub const MAX_ORDER: usize = 8;

/// Interpolation stencil at a query point: `order` consecutive grid indices
/// starting at `base` (which may run off the grid; callers substitute
/// extension values there), with value and derivative weights.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub base: i64,
    pub order: usize,
    pub w: [f64; MAX_ORDER],
    /// Derivative weights with respect to the query coordinate (already
    /// divided by the grid spacing).
    pub dw: [f64; MAX_ORDER],
}

/// Build the centered `order`-point Lagrange stencil for the point `y` on
/// the uniform grid `x_j = x0 + j h`. `order` must be even, `2..=8`.
pub fn stencil(x0: f64, h: f64, y: f64, order: usize) -> Stencil {
    assert!(order >= 2 && order <= MAX_ORDER && order % 2 == 0);
    let jf = (y - x0) / h;
    let base = jf.floor() as i64 - (order as i64 / 2 - 1);
    let t = jf - base as f64;
    let mut w = [0.0; MAX_ORDER];
    let mut dw = [0.0; MAX_ORDER];
    for k in 0..order {
        // l_k(t) = prod_{m != k} (t - m)/(k - m)
        let mut lk = 1.0;
        for m in 0..order {
            if m != k {
                lk *= (t - m as f64) / (k as f64 - m as f64);
            }
        }
        w[k] = lk;
        // l_k'(t) = sum_{m != k} 1/(k - m) prod_{mm != k, m} (t - mm)/(k - mm)
        let mut dk = 0.0;
        for m in 0..order {
            if m == k {
                continue;
            }
            let mut p = 1.0 / (k as f64 - m as f64);
            for mm in 0..order {
                if mm != k && mm != m {
                    p *= (t - mm as f64) / (k as f64 - mm as f64);
                }
            }
            dk += p;
        }
        dw[k] = dk / h;
    }
    Stencil { base, order, w, dw }
}

impl Stencil {
    /// Evaluate against grid values, with extension closures for off-grid
    /// indices.
    pub fn apply(&self, vals: &[f64], left: impl Fn(i64) -> f64, right: impl Fn(i64) -> f64) -> f64 {
        let n = vals.len() as i64;
        let mut acc = 0.0;
        for k in 0..self.order {
            let j = self.base + k as i64;
            let v = if j < 0 {
                left(j)
            } else if j >= n {
                right(j)
            } else {
                vals[j as usize]
            };
            acc += self.w[k] * v;
        }
        acc
    }

    /// Derivative of the interpolant at the query point.
    pub fn apply_deriv(
        &self,
        vals: &[f64],
        left: impl Fn(i64) -> f64,
        right: impl Fn(i64) -> f64,
    ) -> f64 {
        let n = vals.len() as i64;
        let mut acc = 0.0;
        for k in 0..self.order {
            let j = self.base + k as i64;
            let v = if j < 0 {
                left(j)
            } else if j >= n {
                right(j)
            } else {
                vals[j as usize]
            };
            acc += self.dw[k] * v;
        }
        acc
    }
}
