//! Phase-plane shooting for the non-delayed bistable profile problem
//! `w'' + c w' + F(w) = 0`, `w(-inf) = 1`, `w(inf) = 0`, and the envelope
//! speed bounds built from it.
//!
//! The trajectory leaves the saddle `(1, 0)` along its unstable
//! eigendirection; the speed is bisected on the dichotomy "crosses `w = 0`
//! with `w' < 0`" (speed too low) versus "`w'` returns to 0 with `w` still
//! of one sign" (speed too high). The harvested profile is trusted only down
//! to `w = w_stop`; below that the tail is continued along the second-order
//! expansion of the stable manifold of `(0, 0)`, which keeps the resampled
//! profile accurate to a few 1e-8 even though the raw trajectory departs
//! from the connection once `w` is comparable to the bisection error.

use thiserror::Error;

use crate::grid::Grid;
use crate::nonlinearity::{EnvelopePair, ResponseFunction};
use crate::ode::{integrate, Control, OdeOptions, Step};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShootError {
    #[error("speed interval [{lo}, {hi}] does not bracket the connection ({diag}); widen it")]
    NoBracket { lo: f64, hi: f64, diag: String },
    #[error("reaction is not bistable: {0}")]
    PreconditionFailed(String),
    #[error("envelope problem lost bistability: {0}")]
    EnvelopeDegenerate(String),
}

/// Reaction term of a scalar wave problem, with derivative.
pub struct Reaction {
    pub tag: String,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Reaction {
    pub fn new(
        tag: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Reaction {
            tag: tag.into(),
            f: Box::new(f),
            df: Box::new(df),
        }
    }

    /// `F(w) = w (1 - w - f(w))` for a response function.
    pub fn from_response(f: &ResponseFunction) -> Self {
        let g = *f;
        Reaction::new(
            "response",
            move |w| g.reaction(w),
            move |w| g.reaction_deriv(w),
        )
    }

    /// The cubic `F(w) = w (1 - w)(w - alpha)`.
    pub fn nagumo(alpha: f64) -> Self {
        Reaction::new(
            format!("nagumo({alpha})"),
            move |w| w * (1.0 - w) * (w - alpha),
            move |w| -3.0 * w * w + 2.0 * (1.0 + alpha) * w - alpha,
        )
    }

    /// `F_0(w) = w (1 - w - f0(w))` with the lower envelope.
    pub fn envelope_lower(env: &EnvelopePair) -> Self {
        let e = env.clone();
        let e2 = env.clone();
        Reaction::new(
            "envelope_lower",
            move |w| w * (1.0 - w - e.lower(w)),
            move |w| 1.0 - 2.0 * w - e2.lower(w) - w * e2.lower_slope(w),
        )
    }

    /// `F_1(w) = w (1 - w - f1(w))` with the upper envelope.
    pub fn envelope_upper(env: &EnvelopePair) -> Self {
        let e = env.clone();
        let e2 = env.clone();
        Reaction::new(
            "envelope_upper",
            move |w| w * (1.0 - w - e.upper(w)),
            move |w| 1.0 - 2.0 * w - e2.upper(w) - w * e2.upper_slope(w),
        )
    }

    #[inline]
    pub fn eval(&self, w: f64) -> f64 {
        (self.f)(w)
    }

    #[inline]
    pub fn deriv(&self, w: f64) -> f64 {
        (self.df)(w)
    }
}

#[derive(Debug, Clone)]
pub struct ShootOptions {
    /// Bisection tolerance on the speed.
    pub tol_c: f64,
    /// Initial speed bracket.
    pub bracket: (f64, f64),
    /// Offset along the unstable eigendirection at the saddle `(1, 0)`.
    pub eps: f64,
    /// Trajectory is trusted down to this level; the stable-manifold tail
    /// takes over below.
    pub w_stop: f64,
    /// Hard cap on the integration range of a single shot.
    pub x_span: f64,
    /// Resampling grid of the returned profile.
    pub grid: Grid,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            tol_c: 1e-8,
            bracket: (-5.0, 5.0),
            eps: 1e-8,
            w_stop: 1e-3,
            x_span: 1_000.0,
            grid: Grid::new(60.0, 2401),
        }
    }
}

impl ShootOptions {
    /// Speed bisected to machine precision. The harvested trajectory leaves
    /// the heteroclinic connection once `w` is comparable to the speed
    /// error amplified by `(1/w)^{z_unstable/gamma}`, so profile-accurate
    /// harvests need the bisection driven all the way down.
    pub fn precise() -> Self {
        ShootOptions {
            tol_c: 1e-15,
            ..ShootOptions::default()
        }
    }
}

/// Non-delayed wave: profile resampled on a uniform grid, normalised so that
/// `w(0) = 1/2`.
#[derive(Debug, Clone)]
pub struct NondelayedWave {
    pub grid: Grid,
    pub w: Vec<f64>,
    /// `1 - w`, kept exactly where `w` saturates to 1.
    pub one_minus_w: Vec<f64>,
    pub dw: Vec<f64>,
    pub c: f64,
    /// Which reaction was solved.
    pub tag: String,
    /// Width of the bisection interval at termination.
    pub bracket_width: f64,
}

impl NondelayedWave {
    /// Strict decrease at every adjacent grid pair, judged in whichever of
    /// the `w` / `1 - w` representations still resolves the difference.
    pub fn strictly_decreasing(&self) -> bool {
        strictly_decreasing_pairwise(&self.w, &self.one_minus_w)
    }
}

/// True when for every adjacent pair the profile strictly decreases in at
/// least one of the two complementary representations (near `w = 1` only
/// `1 - w` resolves the change, near `w = 0` only `w` does).
pub fn strictly_decreasing_pairwise(w: &[f64], one_minus_w: &[f64]) -> bool {
    w.windows(2)
        .zip(one_minus_w.windows(2))
        .all(|(wp, dp)| wp[1] < wp[0] || dp[1] > dp[0])
}

/// Envelope speed bounds: `c0` from the lower-envelope problem, `c1` from
/// the upper-envelope problem. Since `f0 <= f <= f1` pointwise, the reaction
/// comparison gives `c1 <= c <= c0` for the signed delayed speeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBounds {
    pub c0: f64,
    pub c1: f64,
}

impl SpeedBounds {
    pub fn c_star(&self) -> f64 {
        self.c0.abs().max(self.c1.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Overshoot,
    Undershoot,
}

fn classify(reaction: &Reaction, c: f64, opts: &ShootOptions) -> Outcome {
    let mut outcome = None;
    shoot(reaction, c, opts, None, |step| {
        if step.y1[0] <= 0.0 {
            outcome = Some(Outcome::Overshoot);
            Control::Stop
        } else if step.y1[1] >= 0.0 && step.y1[0] > 1e-12 {
            outcome = Some(Outcome::Undershoot);
            Control::Stop
        } else {
            Control::Continue
        }
    });
    outcome.unwrap_or(Outcome::Undershoot)
}

/// Integrate one shot; `deep_stop` additionally terminates once `w` drops
/// below the given level. Returns the final state.
fn shoot(
    reaction: &Reaction,
    c: f64,
    opts: &ShootOptions,
    deep_stop: Option<f64>,
    mut on_step: impl FnMut(&Step) -> Control,
) -> (f64, [f64; 2]) {
    let dfp1 = reaction.deriv(1.0);
    let z_unstable = 0.5 * (-c + (c * c - 4.0 * dfp1).sqrt());
    let y0 = [1.0 - opts.eps, -opts.eps * z_unstable];
    let rhs = |_x: f64, y: [f64; 2]| [y[1], -c * y[1] - reaction.eval(y[0])];
    // The step cap equals the resampling spacing, for two reasons: the
    // profile is reconstructed by cubic Hermite inside accepted steps, whose
    // h^4 error over larger steps is visible at the 1e-5 level; and the
    // bisected speed compensates the integrator's accumulated drift, so the
    // classification shots and the final harvest must run the identical
    // integrator or the harvest picks up an unstable-mode mismatch in the
    // tail.
    let ode = OdeOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_step: opts.grid.h,
        initial_step: 1e-3,
    };
    integrate(rhs, 0.0, y0, opts.x_span, &ode, |step| {
        let ctl = on_step(step);
        if let Some(stop) = deep_stop {
            if step.y1[0] <= stop {
                return Control::Stop;
            }
        }
        ctl
    })
}

fn check_precondition(reaction: &Reaction) -> Result<(), ShootError> {
    if reaction.eval(0.0).abs() > 1e-10 || reaction.eval(1.0).abs() > 1e-10 {
        return Err(ShootError::PreconditionFailed(format!(
            "F(0) = {}, F(1) = {} must vanish",
            reaction.eval(0.0),
            reaction.eval(1.0)
        )));
    }
    if reaction.deriv(0.0) >= 0.0 || reaction.deriv(1.0) >= 0.0 {
        return Err(ShootError::PreconditionFailed(format!(
            "F'(0) = {}, F'(1) = {} must both be negative",
            reaction.deriv(0.0),
            reaction.deriv(1.0)
        )));
    }
    let n = 2000;
    let mut crossings = 0;
    let mut prev = reaction.eval(1.0 / n as f64);
    for i in 2..n {
        let cur = reaction.eval(i as f64 / n as f64);
        if (prev > 0.0) != (cur > 0.0) {
            crossings += 1;
        }
        prev = cur;
    }
    if crossings != 1 {
        return Err(ShootError::PreconditionFailed(format!(
            "expected exactly one interior zero of F, found {crossings}"
        )));
    }
    Ok(())
}

/// Solve the non-delayed problem by bisection on the wave speed.
pub fn solve_nondelayed(reaction: &Reaction, opts: &ShootOptions) -> Result<NondelayedWave, ShootError> {
    check_precondition(reaction)?;
    let (mut lo, mut hi) = opts.bracket;
    let klo = classify(reaction, lo, opts);
    let khi = classify(reaction, hi, opts);
    if klo != Outcome::Overshoot || khi != Outcome::Undershoot {
        return Err(ShootError::NoBracket {
            lo,
            hi,
            diag: format!("c = {lo} gives {klo:?}, c = {hi} gives {khi:?}"),
        });
    }
    while hi - lo > opts.tol_c {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match classify(reaction, mid, opts) {
            Outcome::Overshoot => lo = mid,
            Outcome::Undershoot => hi = mid,
        }
    }
    let c = 0.5 * (lo + hi);

    // Final trajectory, kept only down to w_stop.
    let mut steps: Vec<Step> = Vec::new();
    let (_x_end, y_end) = shoot(reaction, c, opts, Some(opts.w_stop), |step| {
        steps.push(*step);
        if step.y1[0] <= 0.0 || (step.y1[1] >= 0.0 && step.y1[0] > 1e-12) {
            Control::Stop
        } else {
            Control::Continue
        }
    });
    if steps.is_empty() || y_end[0] > 10.0 * opts.w_stop {
        return Err(ShootError::PreconditionFailed(format!(
            "trajectory at c = {c} terminated before reaching the tail (w = {})",
            y_end[0]
        )));
    }
    // the analytic tail is anchored at the endpoint of the last kept step
    let last = steps[steps.len() - 1];
    let (x_last, w_end) = (last.x1, last.y1[0]);

    // Tail data: decay rates at both equilibria and the quadratic
    // stable-manifold coefficient at the origin.
    let gamma_right = 0.5 * (c + (c * c - 4.0 * reaction.deriv(0.0)).sqrt());
    let dfp1 = reaction.deriv(1.0);
    let gamma_left = 0.5 * (-c + (c * c - 4.0 * dfp1).sqrt());
    let d2f0 = {
        let h = 1e-6;
        (reaction.deriv(h) - reaction.deriv(-h)) / (2.0 * h)
    };
    let m2 = d2f0 / (2.0 * (3.0 * gamma_right - c));

    // Translation: x_half with w(x_half) = 1/2 along the trajectory.
    let mut x_half = None;
    for s in &steps {
        if (s.y0[0] - 0.5) * (s.y1[0] - 0.5) <= 0.0 {
            let mut a = s.x0;
            let mut b = s.x1;
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if (s.eval(m)[0] - 0.5) * (s.eval(a)[0] - 0.5) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            x_half = Some(0.5 * (a + b));
            break;
        }
    }
    let x_half = x_half.ok_or_else(|| {
        ShootError::PreconditionFailed("trajectory never crossed w = 1/2".into())
    })?;

    let x_first = steps[0].x0;
    let grid = opts.grid.clone();
    let n = grid.n;
    let mut w = vec![0.0; n];
    let mut omw = vec![0.0; n];
    let mut dw = vec![0.0; n];
    let mut si = 0usize;
    for i in 0..n {
        let xq = grid.x(i) + x_half;
        if xq <= x_first {
            // left tail: 1 - w grows like e^{gamma_left x} from the seed offset
            let d = opts.eps * (gamma_left * (xq - x_first)).exp();
            omw[i] = d;
            w[i] = 1.0 - d;
            dw[i] = -gamma_left * d;
        } else if xq >= x_last {
            // stable-manifold tail: w' = -gamma w + m2 w^2 integrates to a
            // Bernoulli form
            let e = (-gamma_right * (xq - x_last)).exp();
            let wv = w_end * e / (1.0 - (m2 / gamma_right) * w_end * (1.0 - e));
            w[i] = wv;
            omw[i] = 1.0 - wv;
            dw[i] = -gamma_right * wv + m2 * wv * wv;
        } else {
            while si + 1 < steps.len() && steps[si].x1 < xq {
                si += 1;
            }
            let y = steps[si].eval(xq);
            w[i] = y[0];
            omw[i] = 1.0 - y[0];
            dw[i] = y[1];
        }
    }

    Ok(NondelayedWave {
        grid,
        w,
        one_minus_w: omw,
        dw,
        c,
        tag: reaction.tag.clone(),
        bracket_width: hi - lo,
    })
}

/// Envelope speed bounds: solves the two non-delayed comparison problems
/// built from the monotone envelopes.
pub fn speed_bounds(f: &ResponseFunction, opts: &ShootOptions) -> Result<SpeedBounds, ShootError> {
    let env = EnvelopePair::from_response(f);
    speed_bounds_from_envelopes(&env, opts)
}

pub fn speed_bounds_from_envelopes(
    env: &EnvelopePair,
    opts: &ShootOptions,
) -> Result<SpeedBounds, ShootError> {
    fn count_intersections(g: impl Fn(f64) -> f64) -> usize {
        let n = 2000;
        let mut crossings = 0;
        let mut prev = g(1.0 / n as f64) - (1.0 - 1.0 / n as f64);
        for i in 2..n {
            let w = i as f64 / n as f64;
            let cur = g(w) - (1.0 - w);
            if (prev > 0.0) != (cur > 0.0) {
                crossings += 1;
            }
            prev = cur;
        }
        crossings
    }
    for (crossings, name) in [
        (count_intersections(|w| env.lower(w)), "f0"),
        (count_intersections(|w| env.upper(w)), "f1"),
    ] {
        if crossings != 1 {
            return Err(ShootError::EnvelopeDegenerate(format!(
                "{name}(w) = 1 - w has {crossings} roots in (0, 1), need exactly one"
            )));
        }
    }
    let low = solve_nondelayed(&Reaction::envelope_lower(env), opts)?;
    let up = solve_nondelayed(&Reaction::envelope_upper(env), opts)?;
    Ok(SpeedBounds {
        c0: low.c,
        c1: up.c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::ResponseFunction;

    const NAGUMO_SPEED_03: f64 = 0.282842712474619; // (1 - 2 alpha)/sqrt(2), alpha = 0.3

    #[test]
    fn nagumo_closed_form_speeds() {
        let opts = ShootOptions::default();
        let w = solve_nondelayed(&Reaction::nagumo(0.3), &opts).unwrap();
        assert!((w.c - NAGUMO_SPEED_03).abs() < 1e-6, "c = {}", w.c);
        let w5 = solve_nondelayed(&Reaction::nagumo(0.5), &opts).unwrap();
        assert!(w5.c.abs() < 1e-6, "c = {}", w5.c);
        let w7 = solve_nondelayed(&Reaction::nagumo(0.7), &opts).unwrap();
        assert!((w7.c + NAGUMO_SPEED_03).abs() < 1e-6, "c = {}", w7.c);
    }

    #[test]
    fn profile_matches_exact_nagumo_front() {
        // alpha = 0.3 front is 1/(1 + e^{x/sqrt 2}) up to translation
        let opts = ShootOptions::precise();
        let w = solve_nondelayed(&Reaction::nagumo(0.3), &opts).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..w.grid.n {
            let x = w.grid.x(i);
            let exact = 1.0 / (1.0 + (x / std::f64::consts::SQRT_2).exp());
            worst = worst.max((w.w[i] - exact).abs());
        }
        assert!(worst < 1e-6, "sup profile error {worst}");
        assert!(w.strictly_decreasing());
        assert!(w.one_minus_w[0] < 1e-6 && w.w[w.grid.n - 1] < 1e-6);
    }

    #[test]
    fn residual_of_resampled_profile() {
        let opts = ShootOptions::precise();
        let f = ResponseFunction::family_a();
        let r = Reaction::from_response(&f);
        let sol = solve_nondelayed(&r, &opts).unwrap();
        let h = sol.grid.h;
        let mut worst: f64 = 0.0;
        for i in 2..sol.grid.n - 2 {
            let d2 = (-sol.w[i - 2] + 16.0 * sol.w[i - 1] - 30.0 * sol.w[i] + 16.0 * sol.w[i + 1]
                - sol.w[i + 2])
                / (12.0 * h * h);
            let d1 = (sol.w[i - 2] - 8.0 * sol.w[i - 1] + 8.0 * sol.w[i + 1] - sol.w[i + 2])
                / (12.0 * h);
            worst = worst.max((d2 + sol.c * d1 + r.eval(sol.w[i])).abs());
        }
        assert!(worst < 1e-5, "sup residual {worst}");
    }

    #[test]
    fn speed_sign_matches_reaction_integral() {
        let opts = ShootOptions::default();
        for (f, name) in [
            (ResponseFunction::family_a(), "A"),
            (ResponseFunction::family_b(), "B"),
            (ResponseFunction::family_c(), "C"),
        ] {
            let r = Reaction::from_response(&f);
            let sol = solve_nondelayed(&r, &opts).unwrap();
            assert_eq!(
                sol.c.signum(),
                f.reaction_integral().signum(),
                "family {name}: c = {}, integral = {}",
                sol.c,
                f.reaction_integral()
            );
        }
    }

    #[test]
    fn speed_independent_of_shot_details() {
        let r = Reaction::nagumo(0.35);
        let a = solve_nondelayed(&r, &ShootOptions::default()).unwrap();
        let b = solve_nondelayed(
            &r,
            &ShootOptions {
                eps: 1e-9,
                x_span: 1500.0,
                ..ShootOptions::default()
            },
        )
        .unwrap();
        assert!((a.c - b.c).abs() <= 2.0 * 1e-8, "{} vs {}", a.c, b.c);
    }

    #[test]
    fn envelope_bounds_of_family_a() {
        let f = ResponseFunction::family_a();
        let sb = speed_bounds(&f, &ShootOptions::default()).unwrap();
        assert!(sb.c1 <= sb.c0, "c1 = {} > c0 = {}", sb.c1, sb.c0);
        // the actual non-delayed speed sits between the bounds
        let c = solve_nondelayed(&Reaction::from_response(&f), &ShootOptions::default())
            .unwrap()
            .c;
        assert!(sb.c1 - 1e-6 <= c && c <= sb.c0 + 1e-6);
        assert!(sb.c_star() >= c.abs());
    }

    #[test]
    fn coincident_envelopes_give_equal_speeds() {
        // a nonincreasing admissible g: envelopes coincide with g, so both
        // bound problems are the same and the speeds agree exactly
        let g = |w: f64| 1.5 * (1.0 - w) * (1.0 - w);
        let env = EnvelopePair::from_fn(g, 4097);
        let sb = speed_bounds_from_envelopes(&env, &ShootOptions::default()).unwrap();
        assert_eq!(sb.c0, sb.c1);
        let direct = solve_nondelayed(
            &Reaction::new(
                "g",
                move |w| w * (1.0 - w - g(w)),
                move |w| 1.0 - 2.0 * w - g(w) + w * 3.0 * (1.0 - w),
            ),
            &ShootOptions::default(),
        )
        .unwrap();
        assert!((direct.c - sb.c0).abs() < 1e-6);
    }

    #[test]
    fn no_bracket_reported() {
        // monostable logistic F = w(1 - w) has no bistable connection
        let r = Reaction::new("logistic", |w| w * (1.0 - w), |w| 1.0 - 2.0 * w);
        match solve_nondelayed(&r, &ShootOptions::default()) {
            Err(ShootError::PreconditionFailed(_)) => {}
            other => panic!("expected precondition failure, got {other:?}"),
        }

        // a steep cubic whose speed sqrt(2k) (1/2 - alpha) ~ 9.6 lies
        // outside the default [-5, 5] bracket
        let steep = Reaction::new(
            "steep",
            |w| 200.0 * w * (1.0 - w) * (w - 0.02),
            |w| 200.0 * (-3.0 * w * w + 2.04 * w - 0.02),
        );
        match solve_nondelayed(&steep, &ShootOptions::default()) {
            Err(ShootError::NoBracket { diag, .. }) => {
                assert!(diag.contains("Overshoot"), "{diag}");
            }
            other => panic!("expected NoBracket, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_envelope_reported() {
        // g = 1.4 - 0.6 w is nonincreasing but 1 - w = g(w) has no root in
        // (0, 1), so the envelope problems lose bistability
        let env = EnvelopePair::from_fn(|w| 1.4 - 0.6 * w, 257);
        match speed_bounds_from_envelopes(&env, &ShootOptions::default()) {
            Err(ShootError::EnvelopeDegenerate(_)) => {}
            other => panic!("expected EnvelopeDegenerate, got {other:?}"),
        }
    }
}
