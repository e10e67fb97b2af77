//! The cutoff function `psi` used to write profiles as `w = u + psi`, and
//! the polynomial weight `mu(x) = 1 + x^2`.
//!
//! `psi` is the quintic smoothstep: identically 1 for `x <= 0`, identically 0
//! for `x >= 1`, and `1 - (6x^5 - 15x^4 + 10x^3)` in between. It is C^2 with
//! Lipschitz second derivative, which is all the discrete operators ever use.

/// `psi(x)`.
pub fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

/// `psi'(x) = -30 x^2 (x - 1)^2` on `[0, 1]`, zero outside.
pub fn psi_d1(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        let t = x * (x - 1.0);
        -30.0 * t * t
    }
}

/// `psi''(x) = -60 x (2x - 1)(x - 1)` on `[0, 1]`, zero outside.
pub fn psi_d2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -60.0 * x * (2.0 * x - 1.0) * (x - 1.0)
    }
}

/// `1 - psi(x)`, computed without cancellation for `x <= 0`.
pub fn one_minus_psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

/// `mu(x) = 1 + x^2`.
pub fn mu(x: f64) -> f64 {
    1.0 + x * x
}

pub fn mu_d1(x: f64) -> f64 {
    2.0 * x
}

pub fn mu_d2(_x: f64) -> f64 {
    2.0
}

/// Pointwise sample of cutoff and weight, the tuple the rest of the crate
/// asks for most often.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSample {
    pub psi: f64,
    pub dpsi: f64,
    pub ddpsi: f64,
    pub mu: f64,
}

pub fn cutoff_and_weight(x: f64) -> CutoffSample {
    CutoffSample {
        psi: psi(x),
        dpsi: psi_d1(x),
        ddpsi: psi_d2(x),
        mu: mu(x),
    }
}
