//! Direct method-of-lines simulation of `v_t = v_xx + a v_x + v (1 - v -
//! f(v_tau))` with delay history, Crank-Nicolson diffusion/advection and
//! explicit reaction.
//!
//! The time step divides the delay exactly, so the delayed frame is read
//! straight from the history ring with no interpolation in time. The
//! advection coefficient `a` is zero for the physical model and equals the
//! wave speed when integrating in a co-moving frame for the envelope
//! comparison runs.

use thiserror::Error;

use crate::cutoff;
use crate::grid::Grid;
use crate::linalg::{solve_tridiagonal, LinalgError};
use crate::nonlinearity::ResponseFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("field left the guard range [-0.05, 1.05] at t = {time} (min {min}, max {max})")]
    BlowUp { time: f64, min: f64, max: f64 },
    #[error("fit window contains only {points} front points, need at least 100")]
    WindowTooShort { points: usize },
    #[error("invalid time step: {0}")]
    InvalidTimestep(String),
    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),
    #[error("linear solve failed: {0}")]
    Linear(String),
}

impl From<LinalgError> for SimError {
    fn from(e: LinalgError) -> Self {
        SimError::Linear(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub l_sim: f64,
    pub dx: f64,
    pub dt_target: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            l_sim: 150.0,
            dx: 0.05,
            dt_target: 0.01,
        }
    }
}

/// Default initial condition: the cutoff front widened to a transition of
/// width 4 centered at `x = 0`.
pub fn default_front(x: f64) -> f64 {
    cutoff::psi(x / 4.0 + 0.5)
}

/// Least-squares front speed fit.
#[derive(Debug, Clone, Copy)]
pub struct SpeedFit {
    pub c_sim: f64,
    pub std_error: f64,
    pub window: (f64, f64),
    pub points: usize,
}

pub struct SimState {
    /// `f` applied to the delayed field inside the reaction term.
    response: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    x0: f64,
    dx: f64,
    n: usize,
    pub v: Vec<f64>,
    /// history ring: `ring[m mod (k+1)]` is the field after step `m`
    ring: Vec<Vec<f64>>,
    steps_taken: usize,
    pub dt: f64,
    delay_steps: usize,
    bc: (f64, f64),
    advection: f64,
    pub front_track: Vec<(f64, f64)>,
    // cached Crank-Nicolson tridiagonal
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl SimState {
    /// Simulation of the physical model (no advection).
    pub fn new(
        f: &ResponseFunction,
        opts: &SimOptions,
        tau: f64,
        ic: impl Fn(f64) -> f64,
    ) -> Result<Self, SimError> {
        let g = *f;
        Self::with_reaction(Box::new(move |v| g.eval(v)), 0.0, opts, tau, ic)
    }

    /// General constructor: reaction `v (1 - v - response(v_delayed))` plus
    /// an advection term `advection * v_x` (for co-moving frames).
    pub fn with_reaction(
        response: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        advection: f64,
        opts: &SimOptions,
        tau: f64,
        ic: impl Fn(f64) -> f64,
    ) -> Result<Self, SimError> {
        assert!(tau >= 0.0 && opts.dt_target > 0.0 && opts.dx > 0.0);
        let n = (2.0 * opts.l_sim / opts.dx).round() as usize + 1;
        let x0 = -opts.l_sim;
        let (dt, delay_steps) = if tau > 0.0 {
            let k = (tau / opts.dt_target).round();
            if k < 1.0 {
                return Err(SimError::InvalidTimestep(format!(
                    "dt_target = {} cannot resolve tau = {tau}",
                    opts.dt_target
                )));
            }
            (tau / k, k as usize)
        } else {
            (opts.dt_target, 0)
        };
        let v: Vec<f64> = (0..n).map(|i| ic(x0 + i as f64 * opts.dx)).collect();
        for pair in v.windows(2) {
            if pair[1] > pair[0] + 1e-9 {
                return Err(SimError::InvalidInitialCondition(
                    "initial condition must be nonincreasing".into(),
                ));
            }
        }
        if v.iter().any(|&x| !(-1e-9..=1.0 + 1e-9).contains(&x)) {
            return Err(SimError::InvalidInitialCondition(
                "initial values must lie in [0, 1]".into(),
            ));
        }
        let bc = (v[0], v[n - 1]);
        // history: constant in time, equal to the initial condition
        let ring = vec![v.clone(); delay_steps + 1];

        // Crank-Nicolson matrix for diffusion + advection
        let lam = dt / (2.0 * opts.dx * opts.dx);
        let adv = advection * dt / (4.0 * opts.dx);
        let mut sub = vec![-(lam - adv); n - 1];
        let mut sup = vec![-(lam + adv); n - 1];
        let mut diag = vec![1.0 + 2.0 * lam; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        sup[0] = 0.0;
        sub[n - 2] = 0.0;

        let mut state = SimState {
            response,
            x0,
            dx: opts.dx,
            n,
            v,
            ring,
            steps_taken: 0,
            dt,
            delay_steps,
            bc,
            advection,
            front_track: Vec::new(),
            sub,
            diag,
            sup,
        };
        if let Some(xf) = state.front_position() {
            state.front_track.push((0.0, xf));
        }
        Ok(state)
    }

    pub fn time(&self) -> f64 {
        self.steps_taken as f64 * self.dt
    }

    pub fn ring_len(&self) -> usize {
        self.ring.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Level-set position of `v = 1/2`, by linear interpolation between the
    /// bracketing grid points.
    pub fn front_position(&self) -> Option<f64> {
        for i in 1..self.n {
            if self.v[i] <= 0.5 && self.v[i - 1] > 0.5 {
                let (v0, v1) = (self.v[i - 1], self.v[i]);
                return Some(self.x(i - 1) + self.dx * (v0 - 0.5) / (v0 - v1));
            }
        }
        None
    }

    /// Advance one step.
    pub fn step(&mut self) -> Result<(), SimError> {
        let n = self.n;
        let m = self.steps_taken;
        let k = self.delay_steps;
        let lam = self.dt / (2.0 * self.dx * self.dx);
        let adv = self.advection * self.dt / (4.0 * self.dx);
        let delayed = &self.ring[(m + 1) % (k + 1)];
        let mut rhs = vec![0.0; n];
        rhs[0] = self.bc.0;
        rhs[n - 1] = self.bc.1;
        for i in 1..n - 1 {
            let vi = self.v[i];
            let diff = lam * (self.v[i - 1] - 2.0 * vi + self.v[i + 1])
                + adv * (self.v[i + 1] - self.v[i - 1]);
            let reaction = vi * (1.0 - vi - (self.response)(delayed[i]));
            rhs[i] = vi + diff + self.dt * reaction;
        }
        let vnew = solve_tridiagonal(&self.sub, &self.diag, &self.sup, &rhs)?;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &x in &vnew {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if !(lo >= -0.05 && hi <= 1.05) {
            return Err(SimError::BlowUp {
                time: self.time() + self.dt,
                min: lo,
                max: hi,
            });
        }
        self.v = vnew;
        self.steps_taken += 1;
        let slot = self.steps_taken % (k + 1);
        self.ring[slot] = self.v.clone();
        let t = self.time();
        if let Some(xf) = self.front_position() {
            self.front_track.push((t, xf));
        }
        Ok(())
    }

    pub fn run_until(&mut self, t_final: f64) -> Result<(), SimError> {
        while self.time() < t_final - 0.5 * self.dt {
            self.step()?;
        }
        Ok(())
    }

    /// Least-squares fit of the front position over the given time window.
    pub fn measure_speed(&self, window: (f64, f64)) -> Result<SpeedFit, SimError> {
        let pts: Vec<(f64, f64)> = self
            .front_track
            .iter()
            .copied()
            .filter(|(t, _)| *t >= window.0 && *t <= window.1)
            .collect();
        if pts.len() < 100 {
            return Err(SimError::WindowTooShort { points: pts.len() });
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        let slope = (n * sxy - sx * sy) / denom;
        let icpt = (sy - slope * sx) / n;
        let ss_res: f64 = pts
            .iter()
            .map(|(t, x)| {
                let r = x - (slope * t + icpt);
                r * r
            })
            .sum();
        let se = (ss_res / (n - 2.0) / (sxx - sx * sx / n)).sqrt();
        Ok(SpeedFit {
            c_sim: slope,
            std_error: se,
            window,
            points: pts.len(),
        })
    }

    /// Default measurement window: skip the first fifth of the run.
    pub fn measure_speed_default(&self) -> Result<SpeedFit, SimError> {
        let t = self.time();
        self.measure_speed((0.2 * t, t))
    }
}

/// Embed a profile known on `grid_src` into the (finer-extent, same-spacing)
/// simulation grid, extending by the rest states.
pub fn embed_profile(n: usize, x0: f64, dx: f64, grid_src: &Grid, w_src: &[f64]) -> Vec<f64> {
    assert!((grid_src.h - dx).abs() < 1e-12, "grid spacings must match");
    let offset = ((grid_src.x(0) - x0) / dx).round() as i64;
    (0..n)
        .map(|i| {
            let j = i as i64 - offset;
            if j < 0 {
                1.0
            } else if j >= grid_src.n as i64 {
                0.0
            } else {
                w_src[j as usize]
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    NonDecreasing,
    NonIncreasing,
}

#[derive(Debug, Clone, Copy)]
pub struct ComparisonVerdict {
    pub ok: bool,
    /// Worst signed violation observed (negative means the monotonicity was
    /// broken by that amount).
    pub worst: f64,
    pub samples: usize,
}

/// Evolve an initial profile under non-delayed dynamics in a co-moving
/// frame and check that the field moves monotonically in time, pointwise
/// within `tol` at every sampled interval.
pub fn envelope_comparison_run(
    response: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    advection: f64,
    opts: &SimOptions,
    ic: &[f64],
    direction: Direction,
    t_final: f64,
    sample_every: f64,
    tol: f64,
) -> Result<ComparisonVerdict, SimError> {
    let ic_vec = ic.to_vec();
    let mut state = SimState::with_reaction(response, advection, opts, 0.0, |x| {
        let i = ((x - (-opts.l_sim)) / opts.dx).round() as usize;
        ic_vec[i.min(ic_vec.len() - 1)]
    })?;
    let stride = (sample_every / state.dt).round().max(1.0) as usize;
    let mut prev = state.v.clone();
    let mut worst = f64::INFINITY;
    let mut samples = 0usize;
    let total_steps = (t_final / state.dt).round() as usize;
    for s in 1..=total_steps {
        state.step()?;
        if s % stride == 0 || s == total_steps {
            let margin = state
                .v
                .iter()
                .zip(&prev)
                .map(|(now, before)| match direction {
                    Direction::NonDecreasing => now - before,
                    Direction::NonIncreasing => before - now,
                })
                .fold(f64::INFINITY, f64::min);
            worst = worst.min(margin);
            samples += 1;
            prev = state.v.clone();
        }
    }
    Ok(ComparisonVerdict {
        ok: worst >= -tol,
        worst,
        samples,
    })
}
