//! Continuation of the wave family in the delay, starting from the
//! non-delayed shooting solution.

use thiserror::Error;

use crate::nonlinearity::ResponseFunction;
use crate::profile::{ProfileError, ProfileInit, ProfileOptions, ProfileProblem, WaveSolution};
use crate::scalar_wave::{self, Reaction, ShootError, ShootOptions, SpeedBounds};

#[derive(Debug, Error)]
pub enum ContinuationError {
    #[error("continuation stalled at tau = {last_good_tau}: {source}")]
    Stalled {
        last_good_tau: f64,
        source: ProfileError,
    },
    #[error("solution at tau = {tau} converged but lost monotonicity")]
    MonotonicityLost { tau: f64 },
    #[error("starting solve failed: {0}")]
    Start(#[from] ProfileError),
    #[error("shooting failed: {0}")]
    Shoot(#[from] ShootError),
}

/// One recorded continuation step.
#[derive(Debug, Clone)]
pub struct SweepStep {
    pub solution: WaveSolution,
    /// Signed speed-bound verdict at this step: `c > 0` implies
    /// `c <= c0 + tol`, `c < 0` implies `c >= c1 - tol`, and always
    /// `|c| <= c* + tol` with `tol = 1e-3`.
    pub bounds_ok: bool,
}

#[derive(Debug)]
pub struct Sweep {
    pub steps: Vec<SweepStep>,
    pub bounds: SpeedBounds,
    pub max_weighted_norm: f64,
}

pub const BOUND_TOL: f64 = 1e-3;

impl Sweep {
    pub fn c_table(&self) -> Vec<(f64, f64)> {
        self.steps
            .iter()
            .map(|s| (s.solution.tau, s.solution.c))
            .collect()
    }

    pub fn all_monotone(&self) -> bool {
        self.steps.iter().all(|s| s.solution.monotone)
    }

    pub fn all_bounds_ok(&self) -> bool {
        self.steps.iter().all(|s| s.bounds_ok)
    }
}

fn bounds_verdict(c: f64, b: &SpeedBounds) -> bool {
    let signed = if c > 0.0 {
        c <= b.c0 + BOUND_TOL
    } else if c < 0.0 {
        c >= b.c1 - BOUND_TOL
    } else {
        true
    };
    signed && c.abs() <= b.c_star() + BOUND_TOL
}

/// Solve along `tau = 0, dtau, ..., tau_max`, each step warm-started from
/// the previous solution. On a failed step the sub-step is halved down to
/// `dtau / 16` before giving up. Only the target multiples of `dtau` are
/// recorded.
pub fn continue_in_tau(
    f: &ResponseFunction,
    tau_max: f64,
    dtau: f64,
    opts: &ProfileOptions,
) -> Result<Sweep, ContinuationError> {
    assert!(tau_max >= 0.0 && (tau_max == 0.0 || dtau > 0.0));
    let shoot_opts = ShootOptions {
        grid: opts.grid.clone(),
        ..ShootOptions::precise()
    };
    let bounds = scalar_wave::speed_bounds(f, &ShootOptions::default())?;
    let wave0 = scalar_wave::solve_nondelayed(&Reaction::from_response(f), &shoot_opts)?;

    let problem0 = ProfileProblem::new(*f, 0.0, opts.grid.clone());
    let sol0 = problem0.solve(&ProfileInit::from_shooting(&wave0), opts)?;
    if !sol0.monotone {
        return Err(ContinuationError::MonotonicityLost { tau: 0.0 });
    }

    let mut steps = Vec::new();
    let mut max_norm = sol0.weighted_norm;
    let mut current = sol0.clone();
    steps.push(SweepStep {
        bounds_ok: bounds_verdict(sol0.c, &bounds),
        solution: sol0,
    });

    let n_steps = if tau_max == 0.0 {
        0
    } else {
        (tau_max / dtau).round() as usize
    };
    for k in 1..=n_steps {
        let target = k as f64 * dtau;
        let mut tau = current.tau;
        let mut sub = dtau;
        // march to the target, halving the sub-step on failures
        while tau < target - 1e-12 {
            let next = (tau + sub).min(target);
            let problem = ProfileProblem::new(*f, next, opts.grid.clone());
            match problem.solve(&ProfileInit::from_solution(&current), opts) {
                Ok(sol) => {
                    if !sol.monotone {
                        return Err(ContinuationError::MonotonicityLost { tau: next });
                    }
                    tau = next;
                    current = sol;
                }
                Err(e) => {
                    sub *= 0.5;
                    if sub < dtau / 16.0 - 1e-15 {
                        return Err(ContinuationError::Stalled {
                            last_good_tau: tau,
                            source: e,
                        });
                    }
                }
            }
        }
        max_norm = max_norm.max(current.weighted_norm);
        steps.push(SweepStep {
            bounds_ok: bounds_verdict(current.c, &bounds),
            solution: current.clone(),
        });
    }

    Ok(Sweep {
        steps,
        bounds,
        max_weighted_norm: max_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_sweep_has_single_step() {
        let f = ResponseFunction::family_a();
        let sweep = continue_in_tau(&f, 0.0, 0.1, &ProfileOptions::default()).unwrap();
        assert_eq!(sweep.steps.len(), 1);
        assert_eq!(sweep.steps[0].solution.tau, 0.0);
        assert!(sweep.steps[0].solution.monotone);
        assert!(sweep.steps[0].bounds_ok);
    }
}
