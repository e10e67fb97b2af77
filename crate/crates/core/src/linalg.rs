//! Banded LU with partial pivoting and a Thomas solve for tridiagonal
//! systems.
//!
//! The Newton systems of the profile solver are assembled as banded matrices
//! (the speed unknown is carried as a locally-coupled constant field, so no
//! dense row or column appears); the simulator's Crank-Nicolson step is
//! tridiagonal and diagonally dominant.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular matrix: zero pivot in column {col}")]
    Singular { col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Banded matrix in LAPACK `dgbtrf` storage: entry `(i, j)` with
/// `j - ku <= i <= j + kl` lives at `ab[j * ldab + kl + ku + i - j]`,
/// and the leading `kl` rows of each column are fill space for pivoting.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0);
        let ldab = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "({i},{j}) outside band");
        j * self.ldab + (self.kl + self.ku + i) - j
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku >= j && j + self.kl >= i {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Factor in place with partial pivoting. After factoring, `solve`
    /// may be called any number of times.
    pub fn factor(mut self) -> Result<BandedLu, LinalgError> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kuw = kl + ku; // working upper bandwidth after pivoting
        let ldab = self.ldab;
        // raw offset: pivoting fills entries above the original band, so the
        // strict band check of `idx` does not apply here
        let off = |i: usize, j: usize| j * ldab + (kl + ku + i) - j;
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let imax = (j + kl).min(n - 1);
            // pivot search in column j
            let mut p = j;
            let mut best = self.ab[off(j, j)].abs();
            for i in j + 1..=imax {
                let v = self.ab[off(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::Singular { col: j });
            }
            ipiv[j] = p;
            let jmax = (j + kuw).min(n - 1);
            if p != j {
                for jj in j..=jmax {
                    self.ab.swap(off(j, jj), off(p, jj));
                }
            }
            let piv = self.ab[off(j, j)];
            for i in j + 1..=imax {
                let m = self.ab[off(i, j)] / piv;
                self.ab[off(i, j)] = m;
                if m != 0.0 {
                    for jj in j + 1..=jmax {
                        let u = self.ab[off(j, jj)];
                        self.ab[off(i, jj)] -= m * u;
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            kuw,
            ldab: self.ldab,
            ab: self.ab,
            ipiv,
        })
    }
}

/// Factored form produced by [`BandedMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    kuw: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Storage offset of entry `(i, j)`; same convention as the unfactored
    /// matrix, with fill rows occupying offsets `0..kl` of each column.
    #[inline]
    fn off(&self, i: usize, j: usize) -> usize {
        j * self.ldab + (self.kl + self.ku + i) - j
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if rhs.len() != self.n {
            return Err(LinalgError::Dimension {
                expected: self.n,
                got: rhs.len(),
            });
        }
        let n = self.n;
        let mut x = rhs.to_vec();
        // forward: row swaps and the stored multipliers of L
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != 0.0 {
                let imax = (j + self.kl).min(n - 1);
                for i in j + 1..=imax {
                    x[i] -= self.ab[self.off(i, j)] * xj;
                }
            }
        }
        // back substitution with U (upper bandwidth kl + ku after pivoting)
        for j in (0..n).rev() {
            let jmax = (j + self.kuw).min(n - 1);
            let mut s = x[j];
            for k in j + 1..=jmax {
                s -= self.ab[self.off(j, k)] * x[k];
            }
            let piv = self.ab[self.off(j, j)];
            if piv == 0.0 {
                return Err(LinalgError::Singular { col: j });
            }
            x[j] = s / piv;
        }
        Ok(x)
    }
}

/// Thomas algorithm for tridiagonal systems; no pivoting, intended for
/// diagonally dominant matrices like the Crank-Nicolson step.
pub fn solve_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, LinalgError> {
    let n = diag.len();
    if rhs.len() != n {
        return Err(LinalgError::Dimension {
            expected: n,
            got: rhs.len(),
        });
    }
    assert!(n >= 2 && sub.len() == n - 1 && sup.len() == n - 1);
    let mut cp = vec![0.0; n - 1];
    let mut dp = vec![0.0; n];
    let mut den = diag[0];
    if den == 0.0 {
        return Err(LinalgError::Singular { col: 0 });
    }
    cp[0] = sup[0] / den;
    dp[0] = rhs[0] / den;
    for i in 1..n {
        den = diag[i] - sub[i - 1] * cp[i - 1];
        if den == 0.0 {
            return Err(LinalgError::Singular { col: i });
        }
        if i < n - 1 {
            cp[i] = sup[i] / den;
        }
        dp[i] = (rhs[i] - sub[i - 1] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
        let mut x = b.to_vec();
        for j in 0..n {
            let p = (j..n).max_by(|&r, &s| m[r][j].abs().total_cmp(&m[s][j].abs())).unwrap();
            m.swap(j, p);
            x.swap(j, p);
            for i in j + 1..n {
                let f = m[i][j] / m[j][j];
                for k in j..n {
                    m[i][k] -= f * m[j][k];
                }
                x[i] -= f * x[j];
            }
        }
        for j in (0..n).rev() {
            for k in j + 1..n {
                x[j] -= m[j][k] * x[k];
            }
            x[j] /= m[j][j];
        }
        x
    }

    #[test]
    fn banded_matches_dense_fixed() {
        let n = 12;
        let (kl, ku) = (2, 3);
        let mut band = BandedMatrix::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        let mut seed = 0x4d595df4d0f33173u64;
        let mut rng = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                let v = rng() + if i == j { 3.0 } else { 0.0 };
                band.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let lu = band.factor().unwrap();
        let x = lu.solve(&b).unwrap();
        let xref = dense_solve(&dense, &b);
        for i in 0..n {
            assert!((x[i] - xref[i]).abs() < 1e-12, "{i}: {} vs {}", x[i], xref[i]);
        }
    }

    #[test]
    fn detects_singularity() {
        let mut band = BandedMatrix::zeros(4, 1, 1);
        for i in 0..4 {
            band.set(i, i, 1.0);
        }
        band.set(2, 2, 0.0);
        band.set(1, 2, 0.0);
        band.set(3, 2, 0.0);
        band.set(2, 1, 0.0);
        band.set(2, 3, 0.0);
        // column 2 wholly zero -> singular
        assert!(matches!(band.factor(), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs the row swap
        let mut band = BandedMatrix::zeros(2, 1, 1);
        band.set(0, 1, 1.0);
        band.set(1, 0, 1.0);
        let lu = band.factor().unwrap();
        let x = lu.solve(&[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn thomas_solves() {
        let n = 50;
        let sub = vec![-1.0; n - 1];
        let sup = vec![-1.0; n - 1];
        let diag = vec![2.5; n];
        let b = vec![1.0; n];
        let x = solve_tridiagonal(&sub, &diag, &sup, &b).unwrap();
        for i in 1..n - 1 {
            let r = -x[i - 1] + 2.5 * x[i] - x[i + 1];
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn banded_random_systems(n in 5usize..40, kl in 1usize..4, ku in 1usize..4,
                                 vals in proptest::collection::vec(-1.0f64..1.0, 1700)) {
            let mut it = vals.into_iter();
            let mut band = BandedMatrix::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                    let v = it.next().unwrap() + if i == j { 4.0 } else { 0.0 };
                    band.set(i, j, v);
                    dense[i][j] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
            let x = band.factor().unwrap().solve(&b).unwrap();
            // residual check against the dense matrix
            for i in 0..n {
                let mut r = -b[i];
                for j in 0..n {
                    r += dense[i][j] * x[j];
                }
                prop_assert!(r.abs() < 1e-9, "row {} residual {}", i, r);
            }
        }
    }
}
