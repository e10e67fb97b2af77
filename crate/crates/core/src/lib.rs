//! Solvers and verifiers for monotone bistable travelling waves of the
//! delayed reaction-diffusion equation
//!
//! ```text
//!     v_t = v_xx + v (1 - v) - f(v_tau) v,      v_tau(x, t) = v(x, t - tau).
//! ```
//!
//! A travelling front `v(x, t) = w(x - c t)` decreasing from 1 to 0 satisfies
//! the profile equation `w'' + c w' + w (1 - w - f(w(x + c tau))) = 0`. This
//! crate provides:
//!
//! * [`nonlinearity`] — the parametric response family `f`, admissibility
//!   checks and monotone envelopes,
//! * [`scalar_wave`] — phase-plane shooting for the non-delayed problem and
//!   the envelope speed bounds,
//! * [`profile`] / [`continuation`] — Newton solution of the delayed profile
//!   boundary-value problem and continuation in the delay,
//! * [`spectrum`] — essential-spectrum curves and characteristic tail roots,
//! * [`sim`] — direct method-of-lines simulation with delay history,
//! * [`checks`] — the bundled verification suite run by the CLI and by the
//!   acceptance tests.

pub mod checks;
pub mod continuation;
pub mod cutoff;
pub mod diagnostics;
pub mod grid;
pub mod interp;
pub mod linalg;
pub mod nonlinearity;
pub mod ode;
pub mod profile;
pub mod quad;
pub mod roots;
pub mod scalar_wave;
pub mod sim;
pub mod spectrum;

pub use continuation::{ContinuationError, Sweep, SweepStep};
pub use grid::Grid;
pub use nonlinearity::{BistableStructure, EnvelopePair, FamilyError, ResponseFunction};
pub use profile::{Mode, ProfileError, ProfileOptions, ProfileProblem, WaveSolution};
pub use scalar_wave::{NondelayedWave, Reaction, ShootError, SpeedBounds};
pub use sim::{SimError, SimState, SpeedFit};
pub use spectrum::{CharacteristicRoots, LimitingCoefficients, SpectrumReport};
