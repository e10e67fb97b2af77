//! The bundled verification suite: one callable check per acceptance
//! criterion, shared by the CLI `check` subcommand and the acceptance test
//! target.

use crate::continuation::{self, Sweep};
use crate::grid::Grid;
use crate::nonlinearity::ResponseFunction;
use crate::profile::{ProfileInit, ProfileOptions, ProfileProblem};
use crate::scalar_wave::{self, Reaction, ShootOptions};
use crate::sim::{self, SimOptions};
use crate::spectrum::{self, LimitingCoefficients, Side};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "criterion_{:02} {}: {} ({})",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

fn result(id: usize, name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        id,
        name,
        passed,
        detail,
    }
}

/// Closed-form intersection of `f(w) = 1 - w` for the parametric family.
fn w0_quadratic(kappa: f64, a: f64, b: f64) -> f64 {
    let disc = (b - a) * (b - a) - 4.0 * b * (1.0 - kappa - a);
    ((b - a) + disc.sqrt()) / (2.0 * b)
}

/// Deterministic pseudo-random stream for the finite-difference direction
/// checks (splitmix64).
struct SplitMix(u64);

impl SplitMix {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

/// Criterion 1: Nagumo closed-form speeds.
pub fn nagumo_oracle() -> CheckResult {
    let opts = ShootOptions::default();
    let exact = (1.0 - 2.0 * 0.3) / std::f64::consts::SQRT_2;
    let c3 = scalar_wave::solve_nondelayed(&Reaction::nagumo(0.3), &opts).map(|w| w.c);
    let c5 = scalar_wave::solve_nondelayed(&Reaction::nagumo(0.5), &opts).map(|w| w.c);
    match (c3, c5) {
        (Ok(c3), Ok(c5)) => {
            let e3 = (c3 - exact).abs();
            let passed = e3 <= 1e-3 && c5.abs() <= 1e-3;
            result(
                1,
                "nagumo_oracle",
                passed,
                format!("c(0.3) = {c3:.6} vs {exact:.6} (err {e3:.2e}), |c(0.5)| = {:.2e}", c5.abs()),
            )
        }
        (a, b) => result(1, "nagumo_oracle", false, format!("solver failed: {a:?} {b:?}")),
    }
}

/// Criterion 2: condition validator against the quadratic closed forms.
pub fn condition_validator() -> CheckResult {
    let mut ok = true;
    let mut details = Vec::new();
    for (f, name) in [
        (ResponseFunction::family_a(), "A"),
        (ResponseFunction::family_b(), "B"),
        (ResponseFunction::family_c(), "C"),
    ] {
        let (kappa, a, b) = f.parameters();
        let s = f.characterize();
        let w0x = w0_quadratic(kappa, a, b);
        let sx = f.deriv(1, w0x);
        let e_w0 = (s.w0 - w0x).abs();
        let e_s = (s.slope_at_w0 - sx).abs();
        let pass = s.report.all_passed() && e_w0 <= 1e-9 && e_s <= 1e-9;
        ok &= pass;
        details.push(format!(
            "{name}: conditions {}, w0 err {e_w0:.1e}, f'(w0) err {e_s:.1e}",
            if s.report.all_passed() { "pass" } else { "FAIL" }
        ));
    }
    result(2, "condition_validator", ok, details.join("; "))
}

/// Criterion 7: spectrum condition along both sweeps plus the marginal
/// synthetic case.
pub fn spectrum_conditions(sweep_a: &Sweep, sweep_c: &Sweep) -> CheckResult {
    let mut ok = true;
    let mut min_margin = f64::INFINITY;
    for (sweep, f) in [
        (sweep_a, ResponseFunction::family_a()),
        (sweep_c, ResponseFunction::family_c()),
    ] {
        let lim = LimitingCoefficients::from(&f);
        for step in &sweep.steps {
            let (ns, margin) = spectrum::condition_ns(&lim, step.solution.c, step.solution.tau);
            ok &= ns && margin > 0.0;
            min_margin = min_margin.min(margin);
        }
    }
    // marginal case f(0) = 1 must fail exactly at xi = 0
    let marginal = LimitingCoefficients {
        f_at_zero: 1.0,
        fprime_at_one: 0.0,
    };
    let rep = spectrum::essential_curves(&marginal, -0.2, 0.5, 20.0, 4001);
    let fails_at_zero = !rep.ns_satisfied && rep.max_re_plus.abs() < 1e-14;
    ok &= fails_at_zero;
    result(
        7,
        "spectrum_condition",
        ok,
        format!("min margin over sweeps {min_margin:.4}, marginal case fails: {fails_at_zero}"),
    )
}

/// Criterion 8: decay-rate fits against characteristic-root predictions.
pub fn decay_rates(sweep_a: &Sweep) -> CheckResult {
    let mut ok = true;
    let mut details = Vec::new();
    for target in [0.0, 0.5, 1.0] {
        let step = sweep_a
            .steps
            .iter()
            .find(|s| (s.solution.tau - target).abs() < 1e-9);
        match step.and_then(|s| s.solution.decay.as_ref().map(|d| (s, d))) {
            Some((_s, d)) => {
                let rp = (d.gamma_plus_fit - d.gamma_plus_pred).abs() / d.gamma_plus_pred;
                let rm = (d.gamma_minus_fit - d.gamma_minus_pred).abs() / d.gamma_minus_pred;
                ok &= rp <= 0.05 && rm <= 0.05;
                details.push(format!("tau {target}: rel err +{rp:.3} -{rm:.3}"));
            }
            None => {
                ok = false;
                details.push(format!("tau {target}: no decay fit"));
            }
        }
    }
    // kappa = 0 quadratic equality of the minus-side prediction
    let lim = LimitingCoefficients {
        f_at_zero: 1.2,
        fprime_at_one: 0.0,
    };
    let root = spectrum::characteristic_roots(&lim, 0.2, 1.0, Side::Minus)
        .map(|r| r.roots[0])
        .unwrap_or(f64::NAN);
    let exact = 0.5 * (-0.2 + 4.04f64.sqrt());
    let eq = (root - exact).abs() <= 1e-10;
    ok &= eq;
    details.push(format!("kappa=0 root err {:.1e}", (root - exact).abs()));
    result(8, "decay_rates", ok, details.join("; "))
}

/// Shared context for the expensive artifacts reused by several criteria.
pub struct ChecksContext {
    pub sweep_a: Result<Sweep, String>,
    pub sweep_c: Result<Sweep, String>,
}

impl ChecksContext {
    pub fn build() -> Self {
        let opts = ProfileOptions::default();
        ChecksContext {
            sweep_a: continuation::continue_in_tau(&ResponseFunction::family_a(), 2.0, 0.1, &opts)
                .map_err(|e| e.to_string()),
            sweep_c: continuation::continue_in_tau(&ResponseFunction::family_c(), 2.0, 0.1, &opts)
                .map_err(|e| e.to_string()),
        }
    }
}

/// Criterion 3: the delayed solver at `tau = 0` agrees with shooting.
pub fn tau_zero_consistency() -> CheckResult {
    let mut ok = true;
    let mut details = Vec::new();
    for (f, name) in [
        (ResponseFunction::family_a(), "A"),
        (ResponseFunction::family_c(), "C"),
    ] {
        let shoot_opts = ShootOptions::precise();
        let wave = match scalar_wave::solve_nondelayed(&Reaction::from_response(&f), &shoot_opts) {
            Ok(w) => w,
            Err(e) => {
                ok = false;
                details.push(format!("{name}: shoot failed {e}"));
                continue;
            }
        };
        let opts = ProfileOptions::default();
        let problem = ProfileProblem::new(f, 0.0, opts.grid.clone());
        match problem.solve(&ProfileInit::from_shooting(&wave), &opts) {
            Ok(sol) => {
                let sup = sol
                    .w
                    .iter()
                    .zip(&wave.w)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                let dc = (sol.c - wave.c).abs();
                ok &= sup <= 1e-6 && dc <= 1e-6;
                details.push(format!("{name}: sup dw {sup:.2e}, dc {dc:.2e}"));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{name}: profile failed {e}"));
            }
        }
    }
    result(3, "tau_zero_consistency", ok, details.join("; "))
}

/// Criterion 4: existence sweep, all steps converged strictly monotone.
pub fn existence_sweep(ctx: &ChecksContext) -> CheckResult {
    let mut ok = true;
    let mut details = Vec::new();
    for (sweep, name) in [(&ctx.sweep_a, "A"), (&ctx.sweep_c, "C")] {
        match sweep {
            Ok(s) => {
                let n = s.steps.len();
                let mono = s.all_monotone();
                let res_ok = s
                    .steps
                    .iter()
                    .all(|st| st.solution.residual <= 1e-10);
                let range_ok = s.steps.iter().all(|st| st.solution.interior_in_range());
                ok &= n == 21 && mono && res_ok && range_ok;
                details.push(format!(
                    "{name}: {n} steps, monotone {mono}, residuals ok {res_ok}, interior range ok {range_ok}"
                ));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    result(4, "existence_sweep", ok, details.join("; "))
}

/// Criterion 5: envelope speed bounds along both sweeps.
pub fn speed_bounds_hold(ctx: &ChecksContext) -> CheckResult {
    let mut ok = true;
    let mut details = Vec::new();
    for (sweep, name) in [(&ctx.sweep_a, "A"), (&ctx.sweep_c, "C")] {
        match sweep {
            Ok(s) => {
                let all = s.all_bounds_ok();
                ok &= all;
                details.push(format!(
                    "{name}: bounds ok {all} (c0 = {:.4}, c1 = {:.4}, c in [{:.4}, {:.4}])",
                    s.bounds.c0,
                    s.bounds.c1,
                    s.steps
                        .iter()
                        .map(|x| x.solution.c)
                        .fold(f64::INFINITY, f64::min),
                    s.steps
                        .iter()
                        .map(|x| x.solution.c)
                        .fold(f64::NEG_INFINITY, f64::max),
                ));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    result(5, "speed_bounds", ok, details.join("; "))
}

/// Criterion 6: simulation cross-check on family A.
pub fn simulation_cross_check(ctx: &ChecksContext) -> CheckResult {
    let sweep = match &ctx.sweep_a {
        Ok(s) => s,
        Err(e) => return result(6, "simulation_cross_check", false, e.clone()),
    };
    let f = ResponseFunction::family_a();
    let opts = SimOptions::default();
    let mut ok = true;
    let mut details = Vec::new();
    for target in [0.0, 0.5, 1.0] {
        let step = sweep
            .steps
            .iter()
            .find(|s| (s.solution.tau - target).abs() < 1e-9)
            .expect("sweep covers tau");
        let sol = &step.solution;
        let mut state = match sim::SimState::new(&f, &opts, target, sim::default_front) {
            Ok(s) => s,
            Err(e) => {
                ok = false;
                details.push(format!("tau {target}: init failed {e}"));
                continue;
            }
        };
        if let Err(e) = state.run_until(200.0) {
            ok = false;
            details.push(format!("tau {target}: run failed {e}"));
            continue;
        }
        let fit = match state.measure_speed((40.0, 200.0)) {
            Ok(f) => f,
            Err(e) => {
                ok = false;
                details.push(format!("tau {target}: fit failed {e}"));
                continue;
            }
        };
        let dc = (fit.c_sim - sol.c).abs();

        // recentred profile comparison at t = 200
        let front = state.front_position().unwrap_or(f64::NAN);
        let mut sup = 0.0f64;
        for i in 0..state.n() {
            let xr = state.x(i) - front;
            if xr.abs() <= 50.0 {
                let st = crate::interp::stencil(-sol.grid.l, sol.grid.h, xr, 4);
                let wb = st.apply(&sol.w, |_| 1.0, |_| 0.0);
                sup = sup.max((state.v[i] - wb).abs());
            }
        }
        ok &= dc <= 5e-3 && sup <= 5e-3;
        details.push(format!("tau {target}: |c_sim - c_bvp| {dc:.2e}, shape sup {sup:.2e}"));
    }
    result(6, "simulation_cross_check", ok, details.join("; "))
}

/// Criterion 9: operator fidelity (Jacobian directions, the speed-functional
/// oracle, and the recentered mode consistency).
pub fn operator_fidelity() -> CheckResult {
    let f = ResponseFunction::family_a();
    let mut ok = true;
    let mut details = Vec::new();

    // (a) c_functional on w = e^{-|s|} against the closed form 0.5 ln(5/6)
    let grid = Grid::new(60.0, 2401);
    let problem = ProfileProblem::new(f, 0.5, grid.clone());
    let u: Vec<f64> = (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            (-x.abs()).exp() - crate::cutoff::psi(x)
        })
        .collect();
    match problem.c_functional(&u) {
        Ok(c) => {
            let exact = 0.5 * (5.0f64 / 6.0).ln();
            let err = (c - exact).abs();
            ok &= err <= 1e-6;
            details.push(format!("c_functional err {err:.2e}"));
        }
        Err(e) => {
            ok = false;
            details.push(format!("c_functional failed: {e}"));
        }
    }

    // (b) analytic Jacobian against central differences in 10 directions
    let opts = ProfileOptions::default();
    let shoot = scalar_wave::solve_nondelayed(&Reaction::from_response(&f), &ShootOptions::precise());
    match shoot {
        Ok(wave) => {
            let sol = ProfileProblem::new(f, 0.5, grid.clone())
                .solve(&ProfileInit::from_shooting(&wave), &opts);
            match sol {
                Ok(sol) => {
                    let mut rng = SplitMix(0x5eed_1234_abcd_9876);
                    let mut worst = 0.0f64;
                    let eps = 1e-5;
                    for _ in 0..10 {
                        let du: Vec<f64> = (0..grid.n).map(|_| rng.next_f64()).collect();
                        let jop = problem.jacobian_matvec_operator(&sol.u, &du).unwrap();
                        let up: Vec<f64> =
                            sol.u.iter().zip(&du).map(|(u, d)| u + eps * d).collect();
                        let um: Vec<f64> =
                            sol.u.iter().zip(&du).map(|(u, d)| u - eps * d).collect();
                        let rp = problem.residual_operator(&up).unwrap();
                        let rm = problem.residual_operator(&um).unwrap();
                        let scale = jop.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        for i in 0..grid.n {
                            let fd = (rp[i] - rm[i]) / (2.0 * eps);
                            worst = worst.max((jop[i] - fd).abs() / scale);
                        }
                    }
                    ok &= worst <= 1e-5;
                    details.push(format!("jacobian rel err {worst:.2e}"));

                    // (c) recentering: the shifted pinned solution satisfies
                    // the operator equations; solved on a wider domain so the
                    // boundary bend sits below the tolerance
                    let wide = Grid::new(80.0, 3201);
                    let wide_opts = ProfileOptions {
                        grid: wide.clone(),
                        ..ProfileOptions::default()
                    };
                    let shoot_wide = scalar_wave::solve_nondelayed(
                        &Reaction::from_response(&f),
                        &ShootOptions {
                            grid: wide.clone(),
                            ..ShootOptions::precise()
                        },
                    );
                    match shoot_wide.map_err(|e| e.to_string()).and_then(|w| {
                        let prob = ProfileProblem::new(f, 0.5, wide.clone());
                        prob.solve(&ProfileInit::from_shooting(&w), &wide_opts)
                            .map(|s| (prob, s))
                            .map_err(|e| e.to_string())
                    }) {
                        Ok((prob, wide_sol)) => match prob.recenter_to_functional(&wide_sol) {
                            Ok((sigma, u_shift)) => {
                                let r = prob.residual_operator(&u_shift).unwrap();
                                let sup = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                                ok &= sup <= 1e-9;
                                details.push(format!(
                                    "recentred sigma {sigma:.4}, operator residual {sup:.2e}"
                                ));
                            }
                            Err(e) => {
                                ok = false;
                                details.push(format!("recentering failed: {e}"));
                            }
                        },
                        Err(e) => {
                            ok = false;
                            details.push(format!("wide solve failed: {e}"));
                        }
                    }
                }
                Err(e) => {
                    ok = false;
                    details.push(format!("profile solve failed: {e}"));
                }
            }
        }
        Err(e) => {
            ok = false;
            details.push(format!("shooting failed: {e}"));
        }
    }
    result(9, "operator_fidelity", ok, details.join("; "))
}

/// Criterion 10: envelope dynamics in the co-moving frame.
pub fn envelope_dynamics(ctx: &ChecksContext) -> CheckResult {
    let mut ok = true;
    let mut details = Vec::new();
    let opts = SimOptions::default();

    // family C wave under lower-envelope dynamics: nondecreasing in time
    match &ctx.sweep_c {
        Ok(sweep) => {
            let step = sweep
                .steps
                .iter()
                .filter(|s| s.solution.c > 0.0)
                .find(|s| (s.solution.tau - 0.5).abs() < 1e-9)
                .or_else(|| sweep.steps.iter().rev().find(|s| s.solution.c > 0.0));
            match step {
                Some(s) => {
                    let fc = ResponseFunction::family_c();
                    let env = fc.envelopes(4097);
                    let ic = sim::embed_profile(
                        (2.0 * opts.l_sim / opts.dx).round() as usize + 1,
                        -opts.l_sim,
                        opts.dx,
                        &s.solution.grid,
                        &s.solution.w,
                    );
                    let verdict = sim::envelope_comparison_run(
                        Box::new(move |v| env.lower(v)),
                        s.solution.c,
                        &opts,
                        &ic,
                        sim::Direction::NonDecreasing,
                        10.0,
                        0.5,
                        1e-6,
                    );
                    match verdict {
                        Ok(v) => {
                            ok &= v.ok;
                            details.push(format!(
                                "C (tau {}, c {:.4}): lower-envelope nondecreasing, worst {:.2e}",
                                s.solution.tau, s.solution.c, v.worst
                            ));
                        }
                        Err(e) => {
                            ok = false;
                            details.push(format!("C run failed: {e}"));
                        }
                    }
                }
                None => {
                    ok = false;
                    details.push("no family-C step with c > 0".into());
                }
            }
        }
        Err(e) => {
            ok = false;
            details.push(format!("C sweep: {e}"));
        }
    }

    // family A wave under upper-envelope dynamics: nonincreasing in time
    match &ctx.sweep_a {
        Ok(sweep) => {
            let step = sweep
                .steps
                .iter()
                .find(|s| (s.solution.tau - 0.5).abs() < 1e-9 && s.solution.c < 0.0);
            match step {
                Some(s) => {
                    let fa = ResponseFunction::family_a();
                    let env = fa.envelopes(4097);
                    let ic = sim::embed_profile(
                        (2.0 * opts.l_sim / opts.dx).round() as usize + 1,
                        -opts.l_sim,
                        opts.dx,
                        &s.solution.grid,
                        &s.solution.w,
                    );
                    let verdict = sim::envelope_comparison_run(
                        Box::new(move |v| env.upper(v)),
                        s.solution.c,
                        &opts,
                        &ic,
                        sim::Direction::NonIncreasing,
                        10.0,
                        0.5,
                        1e-6,
                    );
                    match verdict {
                        Ok(v) => {
                            ok &= v.ok;
                            details.push(format!(
                                "A (tau 0.5, c {:.4}): upper-envelope nonincreasing, worst {:.2e}",
                                s.solution.c, v.worst
                            ));
                        }
                        Err(e) => {
                            ok = false;
                            details.push(format!("A run failed: {e}"));
                        }
                    }
                }
                None => {
                    ok = false;
                    details.push("no family-A step at tau 0.5 with c < 0".into());
                }
            }
        }
        Err(e) => {
            ok = false;
            details.push(format!("A sweep: {e}"));
        }
    }
    result(10, "envelope_dynamics", ok, details.join("; "))
}

/// Criterion 11: the weighted a priori bound is finite and grid-stable.
pub fn weighted_bound_stability(ctx: &ChecksContext) -> CheckResult {
    let coarse = match &ctx.sweep_a {
        Ok(s) => s.max_weighted_norm,
        Err(e) => return result(11, "weighted_bound", false, e.clone()),
    };
    let fine_opts = ProfileOptions {
        grid: Grid::new(60.0, 4801),
        ..ProfileOptions::default()
    };
    match continuation::continue_in_tau(&ResponseFunction::family_a(), 2.0, 0.1, &fine_opts) {
        Ok(fine_sweep) => {
            let fine = fine_sweep.max_weighted_norm;
            let rel = (coarse - fine).abs() / coarse.max(fine);
            let passed = coarse.is_finite() && fine.is_finite() && rel <= 0.01;
            result(
                11,
                "weighted_bound",
                passed,
                format!("max norm {coarse:.6} (n=2401) vs {fine:.6} (n=4801), rel diff {rel:.4}"),
            )
        }
        Err(e) => result(11, "weighted_bound", false, format!("fine sweep failed: {e}")),
    }
}

/// Run the full suite in criterion order, streaming results through `emit`.
pub fn run_all(mut emit: impl FnMut(&CheckResult)) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut push = |r: CheckResult, out: &mut Vec<CheckResult>| {
        emit(&r);
        out.push(r);
    };
    push(nagumo_oracle(), &mut out);
    push(condition_validator(), &mut out);
    push(tau_zero_consistency(), &mut out);
    let ctx = ChecksContext::build();
    push(existence_sweep(&ctx), &mut out);
    push(speed_bounds_hold(&ctx), &mut out);
    push(simulation_cross_check(&ctx), &mut out);
    match (&ctx.sweep_a, &ctx.sweep_c) {
        (Ok(a), Ok(c)) => push(spectrum_conditions(a, c), &mut out),
        _ => push(
            result(7, "spectrum_condition", false, "sweeps unavailable".into()),
            &mut out,
        ),
    }
    match &ctx.sweep_a {
        Ok(a) => push(decay_rates(a), &mut out),
        Err(e) => push(result(8, "decay_rates", false, e.clone()), &mut out),
    }
    push(operator_fidelity(), &mut out);
    push(envelope_dynamics(&ctx), &mut out);
    push(weighted_bound_stability(&ctx), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_criteria() {
        assert!(nagumo_oracle().passed);
        assert!(condition_validator().passed);
    }
}
