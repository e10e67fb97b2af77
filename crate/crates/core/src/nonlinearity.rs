//! The parametric response family `f`, its bistable structure report, and
//! monotone envelopes.
//!
//! The family is
//!
//! ```text
//!     f(w) = kappa (1 - w) + (1 - w)^2 (a + b w),
//! ```
//!
//! which in terms of the deviation `delta = 1 - w` is the cubic
//! `g(delta) = kappa delta + (a + b) delta^2 - b delta^3`. All evaluations go
//! through `g`; callers that know `1 - w` exactly (profile tails) can pass it
//! directly and keep full relative precision near `w = 1`.

use thiserror::Error;

use crate::roots::{bisect, newton_bracketed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("kappa must lie in [0, 1), got {0}")]
    KappaRange(f64),
    #[error("a must be positive, got {0}")]
    NonpositiveA(f64),
    #[error("f(0) = kappa + a = {0} must exceed 1")]
    NotExceedingOneAtZero(f64),
    #[error("f'(0) = b - 2a - kappa = {0} must be positive")]
    NotGrowingAtZero(f64),
    #[error("parameters must be finite")]
    NonFinite,
}

/// Response function `f(w) = kappa (1-w) + (1-w)^2 (a + b w)`.
///
/// Immutable after construction; construction rejects parameters that
/// violate `f(0) > 1` or `f'(0) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseFunction {
    kappa: f64,
    a: f64,
    b: f64,
}

impl ResponseFunction {
    pub fn new(kappa: f64, a: f64, b: f64) -> Result<Self, FamilyError> {
        if !(kappa.is_finite() && a.is_finite() && b.is_finite()) {
            return Err(FamilyError::NonFinite);
        }
        if !(0.0..1.0).contains(&kappa) {
            return Err(FamilyError::KappaRange(kappa));
        }
        if a <= 0.0 {
            return Err(FamilyError::NonpositiveA(a));
        }
        if kappa + a <= 1.0 {
            return Err(FamilyError::NotExceedingOneAtZero(kappa + a));
        }
        if b <= kappa + 2.0 * a {
            return Err(FamilyError::NotGrowingAtZero(b - 2.0 * a - kappa));
        }
        Ok(ResponseFunction { kappa, a, b })
    }

    /// Reference family A: `kappa = 0, a = 1.2, b = 3`. `f(0) = 1.2`,
    /// `f'(1) = 0`; the non-delayed wave moves left.
    pub fn family_a() -> Self {
        ResponseFunction::new(0.0, 1.2, 3.0).unwrap()
    }

    /// Reference family B: `kappa = 0.5, a = 0.8, b = 2.6`; exercises the
    /// `f'(1) = -1/2` regime where the delay enters the left tail.
    pub fn family_b() -> Self {
        ResponseFunction::new(0.5, 0.8, 2.6).unwrap()
    }

    /// Reference family C: `kappa = 0, a = 1.05, b = 2.2`; the integral of
    /// the reaction is positive, so the wave moves right.
    pub fn family_c() -> Self {
        ResponseFunction::new(0.0, 1.05, 2.2).unwrap()
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "A" | "a" => Some(Self::family_a()),
            "B" | "b" => Some(Self::family_b()),
            "C" | "c" => Some(Self::family_c()),
            _ => None,
        }
    }

    pub fn parameters(&self) -> (f64, f64, f64) {
        (self.kappa, self.a, self.b)
    }

    /// `g(delta) = f(1 - delta)`.
    #[inline]
    pub fn eval_at_delta(&self, delta: f64) -> f64 {
        delta * (self.kappa + delta * ((self.a + self.b) - self.b * delta))
    }

    /// `g'(delta) = -f'(1 - delta)`.
    #[inline]
    pub fn gprime_at_delta(&self, delta: f64) -> f64 {
        self.kappa + delta * (2.0 * (self.a + self.b) - 3.0 * self.b * delta)
    }

    #[inline]
    pub fn eval(&self, w: f64) -> f64 {
        self.eval_at_delta(1.0 - w)
    }

    /// k-th derivative, `k <= 4`. `f` is a cubic, so the fourth derivative
    /// vanishes identically.
    pub fn deriv(&self, k: usize, w: f64) -> f64 {
        let d = 1.0 - w;
        match k {
            0 => self.eval_at_delta(d),
            1 => -self.gprime_at_delta(d),
            2 => 2.0 * (self.a + self.b) - 6.0 * self.b * d,
            3 => 6.0 * self.b,
            4 => 0.0,
            _ => panic!("derivatives available up to order 4"),
        }
    }

    #[inline]
    pub fn deriv1(&self, w: f64) -> f64 {
        -self.gprime_at_delta(1.0 - w)
    }

    #[inline]
    pub fn f_at_zero(&self) -> f64 {
        self.kappa + self.a
    }

    #[inline]
    pub fn fprime_at_zero(&self) -> f64 {
        self.b - 2.0 * self.a - self.kappa
    }

    #[inline]
    pub fn fprime_at_one(&self) -> f64 {
        -self.kappa
    }

    /// Reaction term `F(w) = w (1 - w - f(w))`.
    #[inline]
    pub fn reaction(&self, w: f64) -> f64 {
        w * ((1.0 - w) - self.eval(w))
    }

    /// `F'(w) = 1 - 2w - f(w) - w f'(w)`.
    #[inline]
    pub fn reaction_deriv(&self, w: f64) -> f64 {
        1.0 - 2.0 * w - self.eval(w) - w * self.deriv1(w)
    }

    /// Exact value of the integral of the reaction over `[0, 1]`. `F` is the
    /// quartic `(1-c0) w - (1+c1) w^2 - c2 w^3 - c3 w^4` in the monomial
    /// coefficients of `f`.
    pub fn reaction_integral(&self) -> f64 {
        let c0 = self.kappa + self.a;
        let c1 = self.b - 2.0 * self.a - self.kappa;
        let c2 = self.a - 2.0 * self.b;
        let c3 = self.b;
        (1.0 - c0) / 2.0 - (1.0 + c1) / 3.0 - c2 / 4.0 - c3 / 5.0
    }

    /// Locate the structural landmarks and run the admissibility report.
    /// Failing conditions are recorded, not raised.
    pub fn characterize(&self) -> BistableStructure {
        let n_scan = 10_000usize;
        let fv = |w: f64| self.eval(w);
        let fp = |w: f64| self.deriv1(w);

        // argmax of f on [0, 1]: sign change of f' from + to -.
        let argmax = if self.fprime_at_zero() <= 0.0 {
            0.0
        } else {
            let mut hi = 1.0;
            let mut found = false;
            for i in 1..=n_scan {
                let w = i as f64 / n_scan as f64;
                if fp(w) <= 0.0 {
                    hi = w;
                    found = true;
                    break;
                }
            }
            if found {
                bisect(fp, hi - 1.0 / n_scan as f64, hi, 200)
            } else {
                1.0
            }
        };

        // wstar: f(w) = 1 right of the hump.
        let wstar = if fv(argmax) > 1.0 {
            bisect(|w| fv(w) - 1.0, argmax, 1.0, 200)
        } else {
            f64::NAN
        };

        // f0 breakpoint: f returns to the level f(0) right of the hump.
        let f0_breakpoint = if fv(argmax) > self.f_at_zero() && wstar.is_finite() {
            bisect(|w| fv(w) - self.f_at_zero(), argmax, wstar, 200)
        } else {
            0.0
        };

        // w0: the intersection f(w) = 1 - w in (0, 1).
        let r = |w: f64| fv(w) - (1.0 - w);
        let mut w0 = f64::NAN;
        let mut crossings = 0usize;
        let mut prev = r(1.0 / n_scan as f64);
        for i in 2..n_scan {
            let w = i as f64 / n_scan as f64;
            let cur = r(w);
            if (prev > 0.0) != (cur > 0.0) {
                crossings += 1;
                if crossings == 1 {
                    let lo = (i - 1) as f64 / n_scan as f64;
                    let seed = bisect(r, lo, w, 80);
                    w0 = newton_bracketed(r, |w| fp(w) + 1.0, seed, lo, w, 1e-15, 40);
                }
            }
            prev = cur;
        }

        let slope_at_w0 = if w0.is_finite() { fp(w0) } else { f64::NAN };

        let mut checks = Vec::new();

        // f > 0 on [0, 1), f(1) = 0, f'(1) > -1
        let mut min_f = f64::INFINITY;
        for i in 0..n_scan {
            let w = i as f64 / n_scan as f64;
            min_f = min_f.min(fv(w));
        }
        checks.push(ConditionCheck {
            name: "positivity",
            passed: min_f > 0.0 && self.eval(1.0) == 0.0 && self.fprime_at_one() > -1.0,
            witness: min_f,
            note: format!(
                "min f on [0,1) = {min_f:.6e}, f(1) = {}, f'(1) = {}",
                self.eval(1.0),
                self.fprime_at_one()
            ),
        });

        // f(0) > 1, f'(0) > 0, f > 1 on [0, wstar)
        let mut min_f_left = f64::INFINITY;
        if wstar.is_finite() {
            for i in 0..n_scan {
                let w = wstar * i as f64 / n_scan as f64;
                min_f_left = min_f_left.min(fv(w));
            }
        }
        checks.push(ConditionCheck {
            name: "exceeds_one_below_wstar",
            passed: self.f_at_zero() > 1.0
                && self.fprime_at_zero() > 0.0
                && wstar.is_finite()
                && min_f_left > 1.0,
            witness: min_f_left,
            note: format!(
                "f(0) = {}, f'(0) = {}, min f on [0, wstar) = {min_f_left:.6}",
                self.f_at_zero(),
                self.fprime_at_zero()
            ),
        });

        // unique intersection with 1 - w, slope below -1 there
        checks.push(ConditionCheck {
            name: "single_intersection",
            passed: crossings == 1 && slope_at_w0 < -1.0,
            witness: slope_at_w0,
            note: format!("crossings = {crossings}, f'(w0) = {slope_at_w0:.6}"),
        });

        // f' strictly negative from the level-1 crossing up to (not including) 1
        let mut max_fp = f64::NEG_INFINITY;
        if wstar.is_finite() {
            for i in 0..n_scan {
                let w = wstar + (1.0 - wstar) * i as f64 / n_scan as f64;
                max_fp = max_fp.max(fp(w));
            }
        }
        checks.push(ConditionCheck {
            name: "decreasing_beyond_wstar",
            passed: wstar.is_finite() && max_fp < 0.0,
            witness: max_fp,
            note: format!("max f' on [wstar, 1) = {max_fp:.6}"),
        });

        BistableStructure {
            w0,
            wstar,
            f0_breakpoint,
            f1_breakpoint: argmax,
            slope_at_zero: self.fprime_at_zero(),
            slope_at_one: self.fprime_at_one(),
            slope_at_w0,
            report: ConditionReport { checks },
        }
    }

    /// Monotone envelopes tabulated on `n` uniform points of `[0, 1]`.
    pub fn envelopes(&self, n: usize) -> EnvelopePair {
        EnvelopePair::from_fn(|w| self.eval(w), n)
    }
}

/// One admissibility check with a numeric witness.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub witness: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Landmarks of an admissible response function.
#[derive(Debug, Clone, PartialEq)]
pub struct BistableStructure {
    /// Root of `f(w) = 1 - w` in `(0, 1)`.
    pub w0: f64,
    /// Root of `f(w) = 1` right of the hump.
    pub wstar: f64,
    /// Largest `w` for which the running-min envelope is still flat.
    pub f0_breakpoint: f64,
    /// Argmax of `f` (where the running-max envelope stops being flat).
    pub f1_breakpoint: f64,
    pub slope_at_zero: f64,
    pub slope_at_one: f64,
    pub slope_at_w0: f64,
    pub report: ConditionReport,
}

/// Nonincreasing envelopes `f0 <= f <= f1` tabulated on a uniform grid of
/// `[0, 1]` with piecewise-linear interpolation and constant extension.
///
/// `f0` is the running minimum from the left, `f1` the running maximum from
/// the right; both are nonincreasing by construction and coincide with `f`
/// wherever `f` itself is nonincreasing in the required direction.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePair {
    f0: Vec<f64>,
    f1: Vec<f64>,
    h: f64,
}

pub const ENVELOPE_GRID: usize = 4097;

impl EnvelopePair {
    pub fn from_fn(f: impl Fn(f64) -> f64, n: usize) -> Self {
        assert!(n >= 2);
        let h = 1.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
        let mut f0 = vals.clone();
        for i in 1..n {
            f0[i] = f0[i].min(f0[i - 1]);
        }
        let mut f1 = vals;
        for i in (0..n - 1).rev() {
            f1[i] = f1[i].max(f1[i + 1]);
        }
        EnvelopePair { f0, f1, h }
    }

    pub fn from_response(f: &ResponseFunction) -> Self {
        f.envelopes(ENVELOPE_GRID)
    }

    pub fn n(&self) -> usize {
        self.f0.len()
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn lower_at(&self, i: usize) -> f64 {
        self.f0[i]
    }

    pub fn upper_at(&self, i: usize) -> f64 {
        self.f1[i]
    }

    fn interp(tab: &[f64], h: f64, w: f64) -> f64 {
        if w <= 0.0 {
            return tab[0];
        }
        if w >= 1.0 {
            return tab[tab.len() - 1];
        }
        let t = w / h;
        let j = (t as usize).min(tab.len() - 2);
        let s = t - j as f64;
        tab[j] + s * (tab[j + 1] - tab[j])
    }

    fn slope(tab: &[f64], h: f64, w: f64) -> f64 {
        let n = tab.len();
        let j = if w <= 0.0 {
            0
        } else if w >= 1.0 {
            n - 2
        } else {
            ((w / h) as usize).min(n - 2)
        };
        (tab[j + 1] - tab[j]) / h
    }

    /// `f0(w)`, the lower envelope.
    pub fn lower(&self, w: f64) -> f64 {
        Self::interp(&self.f0, self.h, w)
    }

    /// `f1(w)`, the upper envelope.
    pub fn upper(&self, w: f64) -> f64 {
        Self::interp(&self.f1, self.h, w)
    }

    pub fn lower_slope(&self, w: f64) -> f64 {
        Self::slope(&self.f0, self.h, w)
    }

    pub fn upper_slope(&self, w: f64) -> f64 {
        Self::slope(&self.f1, self.h, w)
    }
}
