//! Uniform symmetric grids on `[-L, L]`.

/// Uniform grid on `[-L, L]` with `n` points. `n` is odd so that `x = 0` is
/// the grid point with index `n / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub l: f64,
    pub n: usize,
    pub h: f64,
}

impl Grid {
    /// A grid needs `n >= 5` odd points; the profile quadrature additionally
    /// wants `n - 1` divisible by 4 (both defaults, 2401 and 4801, are).
    pub fn new(l: f64, n: usize) -> Self {
        assert!(l > 0.0 && n >= 5 && n % 2 == 1, "grid needs odd n >= 5 and L > 0");
        let h = 2.0 * l / (n - 1) as f64;
        Grid { l, n, h }
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h - self.l
    }

    /// Index of the grid point `x = 0`.
    #[inline]
    pub fn mid(&self) -> usize {
        self.n / 2
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}
