//! Essential-spectrum curves of the limiting operators and the
//! characteristic equations governing the tail decay rates.
//!
//! At the rest states the linearized operators have constant coefficients;
//! their Fourier symbols trace the curves
//!
//! ```text
//!     lambda_plus(xi)  = -xi^2 + i c xi + 1 - f(0)
//!     lambda_minus(xi) = -xi^2 + i c xi - 1 - f'(1) e^{i c tau xi}
//! ```
//!
//! The no-bounded-kernel condition holds exactly when both curves stay in
//! the open left half plane. Real exponential rates at the two tails come
//! from `z^2 + c z + 1 - f(0) = 0` (state 0) and
//! `z^2 + c z - 1 = f'(1) e^{c tau z}` (state 1).

use thiserror::Error;

use crate::nonlinearity::ResponseFunction;
use crate::roots::newton_bracketed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("characteristic root left (0, 10]: {0}")]
    RootNotFound(String),
}

/// The two numbers the limiting operators depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitingCoefficients {
    pub f_at_zero: f64,
    pub fprime_at_one: f64,
}

impl From<&ResponseFunction> for LimitingCoefficients {
    fn from(f: &ResponseFunction) -> Self {
        LimitingCoefficients {
            f_at_zero: f.f_at_zero(),
            fprime_at_one: f.fprime_at_one(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub xi: Vec<f64>,
    /// `(re, im)` samples of the curve at the zero state.
    pub lambda_plus: Vec<(f64, f64)>,
    /// `(re, im)` samples of the curve at the one state.
    pub lambda_minus: Vec<(f64, f64)>,
    pub max_re_plus: f64,
    pub max_re_minus: f64,
    pub ns_satisfied: bool,
    /// Distance of the rightmost sampled real part from the imaginary axis.
    pub margin: f64,
}

pub fn essential_curves(
    lim: &LimitingCoefficients,
    c: f64,
    tau: f64,
    xi_max: f64,
    n_xi: usize,
) -> SpectrumReport {
    assert!(n_xi >= 3 && xi_max > 0.0);
    let mut xi = Vec::with_capacity(n_xi);
    let mut lp = Vec::with_capacity(n_xi);
    let mut lm = Vec::with_capacity(n_xi);
    let mut max_re_plus = f64::NEG_INFINITY;
    let mut max_re_minus = f64::NEG_INFINITY;
    for i in 0..n_xi {
        let x = -xi_max + 2.0 * xi_max * i as f64 / (n_xi - 1) as f64;
        let re_p = -x * x + 1.0 - lim.f_at_zero;
        let im_p = c * x;
        let (s, co) = (c * tau * x).sin_cos();
        let re_m = -x * x - 1.0 - lim.fprime_at_one * co;
        let im_m = c * x - lim.fprime_at_one * s;
        max_re_plus = max_re_plus.max(re_p);
        max_re_minus = max_re_minus.max(re_m);
        xi.push(x);
        lp.push((re_p, im_p));
        lm.push((re_m, im_m));
    }
    let worst = max_re_plus.max(max_re_minus);
    SpectrumReport {
        xi,
        lambda_plus: lp,
        lambda_minus: lm,
        max_re_plus,
        max_re_minus,
        ns_satisfied: worst < 0.0,
        margin: -worst,
    }
}

/// No-bounded-kernel verdict with margin, on the default sampling grid.
pub fn condition_ns(lim: &LimitingCoefficients, c: f64, tau: f64) -> (bool, f64) {
    let rep = essential_curves(lim, c, tau, 20.0, 4001);
    (rep.ns_satisfied, rep.margin)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// State 0 at `x -> +inf`.
    Plus,
    /// State 1 at `x -> -inf`.
    Minus,
}

#[derive(Debug, Clone)]
pub struct CharacteristicRoots {
    pub side: Side,
    /// Plus side: both real roots (one negative, one positive).
    /// Minus side: the single positive real root.
    pub roots: Vec<f64>,
    pub residual: f64,
}

pub fn characteristic_roots(
    lim: &LimitingCoefficients,
    c: f64,
    tau: f64,
    side: Side,
) -> Result<CharacteristicRoots, SpectrumError> {
    match side {
        Side::Plus => {
            // z^2 + c z + 1 - f(0) = 0; f(0) > 1 makes the roots real with
            // negative product
            let q = 1.0 - lim.f_at_zero;
            let disc = c * c - 4.0 * q;
            if disc <= 0.0 {
                return Err(SpectrumError::RootNotFound(format!(
                    "plus-side discriminant {disc} <= 0 (f(0) <= 1?)"
                )));
            }
            let s = disc.sqrt();
            let z1 = 0.5 * (-c - s);
            let z2 = 0.5 * (-c + s);
            let res = (z1 * z1 + c * z1 + q).abs().max((z2 * z2 + c * z2 + q).abs());
            Ok(CharacteristicRoots {
                side,
                roots: vec![z1, z2],
                residual: res,
            })
        }
        Side::Minus => {
            // z^2 + c z - 1 - f'(1) e^{c tau z} = 0, positive real root.
            let kappa = -lim.fprime_at_one;
            if !(0.0..1.0).contains(&kappa) {
                return Err(SpectrumError::RootNotFound(format!(
                    "need -1 < f'(1) <= 0, got {}",
                    lim.fprime_at_one
                )));
            }
            let g = |z: f64| z * z + c * z - 1.0 + kappa * (c * tau * z).exp();
            let dg = |z: f64| 2.0 * z + c + kappa * c * tau * (c * tau * z).exp();
            let guess = 0.5 * (-c + (c * c + 4.0).sqrt());
            if !(0.0..=10.0).contains(&guess) {
                return Err(SpectrumError::RootNotFound(format!(
                    "initial guess {guess} outside (0, 10]"
                )));
            }
            // g(0) = kappa - 1 < 0 and g grows quadratically, so a positive
            // root is bracketed in (0, 10] for all admissible parameters.
            if g(10.0) <= 0.0 {
                return Err(SpectrumError::RootNotFound(
                    "no sign change on (0, 10]".into(),
                ));
            }
            let z = newton_bracketed(g, dg, guess, 1e-6, 10.0, 1e-14, 60);
            let res = g(z).abs();
            if res > 1e-12 || !(0.0..=10.0).contains(&z) {
                return Err(SpectrumError::RootNotFound(format!(
                    "newton stalled at z = {z}, residual {res}"
                )));
            }
            Ok(CharacteristicRoots {
                side,
                roots: vec![z],
                residual: res,
            })
        }
    }
}

/// Predicted decay rate of `w` at `+inf`: magnitude of the negative
/// plus-side root.
pub fn decay_rate_plus(lim: &LimitingCoefficients, c: f64) -> f64 {
    0.5 * (c + (c * c + 4.0 * (lim.f_at_zero - 1.0)).sqrt())
}

/// Predicted decay rate of `1 - w` at `-inf`: the positive minus-side root.
pub fn decay_rate_minus(
    lim: &LimitingCoefficients,
    c: f64,
    tau: f64,
) -> Result<f64, SpectrumError> {
    Ok(characteristic_roots(lim, c, tau, Side::Minus)?.roots[0])
}
