//! Subcommand implementations: each produces CSV artifacts in the output
//! directory plus an ordered text summary.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use delwave_core::checks;
use delwave_core::continuation::{self, Sweep};
use delwave_core::grid::Grid;
use delwave_core::nonlinearity::ResponseFunction;
use delwave_core::profile::{ProfileOptions, WaveSolution};
use delwave_core::scalar_wave::{self, Reaction, ShootOptions};
use delwave_core::sim::{self, SimOptions, SimState};
use delwave_core::spectrum::{self, LimitingCoefficients};

use crate::config::Config;
use crate::summary::{fmt_float, RunSummary};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or usage: exit status 2.
    Config(String),
    /// A computation failed: exit status 1.
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Computation(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Computation(m) => write!(f, "computation: {m}"),
        }
    }
}

pub struct Context {
    pub cfg: Config,
    pub out_dir: PathBuf,
    pub tau_override: Option<f64>,
}

impl Context {
    fn response(&self) -> Result<ResponseFunction, CliError> {
        ResponseFunction::new(self.cfg.kappa, self.cfg.a, self.cfg.b)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    fn grid(&self) -> Grid {
        Grid::new(self.cfg.l, self.cfg.n)
    }

    fn profile_options(&self) -> ProfileOptions {
        ProfileOptions {
            grid: self.grid(),
            newton_tol: self.cfg.newton_tol,
            max_iter: self.cfg.max_iter,
            mode: self.cfg.mode,
            alpha: self.cfg.alpha,
        }
    }

    fn sim_options(&self) -> SimOptions {
        SimOptions {
            l_sim: self.cfg.l_sim,
            dx: self.cfg.dx,
            dt_target: self.cfg.dt_target,
        }
    }

    fn tau(&self) -> Result<f64, CliError> {
        let tau = self.tau_override.unwrap_or(0.0);
        if tau < 0.0 || !tau.is_finite() {
            return Err(CliError::Config(format!("tau must be nonnegative, got {tau}")));
        }
        Ok(tau)
    }

    fn write_csv(
        &self,
        name: &str,
        header: &str,
        rows: impl Iterator<Item = String>,
    ) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Computation(format!("cannot create output dir: {e}")))?;
        let path = self.out_dir.join(name);
        let mut fh = fs::File::create(&path)
            .map_err(|e| CliError::Computation(format!("cannot write {}: {e}", path.display())))?;
        let mut text = String::with_capacity(1 << 16);
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        fh.write_all(text.as_bytes())
            .map_err(|e| CliError::Computation(format!("write failed: {e}")))?;
        Ok(path)
    }
}

/// Solve the profile problem at the given delay, walking the delay up from
/// the non-delayed shooting solution in continuation steps.
fn solve_wave_at(ctx: &Context, tau: f64) -> Result<(Sweep, WaveSolution), CliError> {
    let f = ctx.response()?;
    let opts = ctx.profile_options();
    let step = if tau > 0.0 {
        tau / (tau / ctx.cfg.dtau).ceil()
    } else {
        ctx.cfg.dtau
    };
    let sweep = continuation::continue_in_tau(&f, tau, step, &opts)
        .map_err(|e| CliError::Computation(e.to_string()))?;
    let sol = sweep
        .steps
        .last()
        .expect("sweep never empty")
        .solution
        .clone();
    Ok((sweep, sol))
}

fn profile_rows<'a>(
    grid: &'a Grid,
    w: &'a [f64],
    dw: &'a [f64],
) -> impl Iterator<Item = String> + 'a {
    (0..grid.n).map(move |i| {
        format!(
            "{},{},{}",
            fmt_float(grid.x(i)),
            fmt_float(w[i]),
            fmt_float(dw[i])
        )
    })
}

pub fn validate(ctx: &Context) -> Result<RunSummary, CliError> {
    let f = ctx.response()?;
    let s = f.characterize();
    let mut out = RunSummary::new();
    let (kappa, a, b) = f.parameters();
    out.push_float("kappa", kappa);
    out.push_float("a", a);
    out.push_float("b", b);
    for check in &s.report.checks {
        out.push(
            &format!("condition_{}", check.name),
            if check.passed { "pass" } else { "fail" },
        );
        out.push_float(&format!("witness_{}", check.name), check.witness);
    }
    out.push("all_conditions", if s.report.all_passed() { "pass" } else { "fail" });
    out.push_float("w0", s.w0);
    out.push_float("wstar", s.wstar);
    out.push_float("f0_breakpoint", s.f0_breakpoint);
    out.push_float("f1_breakpoint", s.f1_breakpoint);
    out.push_float("slope_at_w0", s.slope_at_w0);
    out.push_float("reaction_integral", f.reaction_integral());
    Ok(out)
}

pub fn wave0(ctx: &Context) -> Result<RunSummary, CliError> {
    let f = ctx.response()?;
    let shoot_opts = ShootOptions {
        grid: ctx.grid(),
        ..ShootOptions::precise()
    };
    let wave = scalar_wave::solve_nondelayed(&Reaction::from_response(&f), &shoot_opts)
        .map_err(|e| CliError::Computation(e.to_string()))?;
    let bounds = scalar_wave::speed_bounds(&f, &ShootOptions::default())
        .map_err(|e| CliError::Computation(e.to_string()))?;
    let path = ctx.write_csv(
        "wave0_profile.csv",
        "x,w,dw",
        profile_rows(&wave.grid, &wave.w, &wave.dw),
    )?;
    let mut out = RunSummary::new();
    out.push_float("c", wave.c);
    out.push_float("c0", bounds.c0);
    out.push_float("c1", bounds.c1);
    out.push_float("c_star", bounds.c_star());
    out.push_float("bracket_width", wave.bracket_width);
    out.push("monotone", wave.strictly_decreasing());
    out.artifact(&path);
    Ok(out)
}

pub fn wave(ctx: &Context) -> Result<RunSummary, CliError> {
    let tau = ctx.tau()?;
    let (_, sol) = solve_wave_at(ctx, tau)?;
    let path = ctx.write_csv(
        "wave_profile.csv",
        "x,w,dw",
        profile_rows(&sol.grid, &sol.w, &sol.dw),
    )?;
    let mut out = RunSummary::new();
    out.push_float("tau", sol.tau);
    out.push_float("c", sol.c);
    out.push("iterations", sol.iterations);
    out.push_float("residual", sol.residual);
    out.push("monotone", sol.monotone);
    out.push_float("norm_Emu", sol.weighted_norm);
    if let Some(d) = &sol.decay {
        out.push_float("gamma_plus", d.gamma_plus_fit);
        out.push_float("gamma_minus", d.gamma_minus_fit);
        out.push_float("gamma_plus_pred", d.gamma_plus_pred);
        out.push_float("gamma_minus_pred", d.gamma_minus_pred);
    }
    out.artifact(&path);
    Ok(out)
}

pub fn sweep(ctx: &Context) -> Result<RunSummary, CliError> {
    let f = ctx.response()?;
    let tau_max = ctx.tau_override.unwrap_or(ctx.cfg.tau_max);
    if tau_max < 0.0 {
        return Err(CliError::Config("tau_max must be nonnegative".into()));
    }
    let sweep = continuation::continue_in_tau(&f, tau_max, ctx.cfg.dtau, &ctx.profile_options())
        .map_err(|e| CliError::Computation(e.to_string()))?;
    let rows = sweep.steps.iter().map(|s| {
        let sol = &s.solution;
        let (gp, gm) = sol
            .decay
            .as_ref()
            .map(|d| (d.gamma_plus_fit, d.gamma_minus_fit))
            .unwrap_or((f64::NAN, f64::NAN));
        format!(
            "{},{},{},{},{},{}",
            fmt_float(sol.tau),
            fmt_float(sol.c),
            fmt_float(sol.weighted_norm),
            fmt_float(gp),
            fmt_float(gm),
            sol.monotone
        )
    });
    let path = ctx.write_csv("sweep.csv", "tau,c,norm_Emu,gamma_plus,gamma_minus,monotone", rows)?;
    let mut out = RunSummary::new();
    out.push("steps", sweep.steps.len());
    out.push_float("c0", sweep.bounds.c0);
    out.push_float("c1", sweep.bounds.c1);
    out.push_float("c_star", sweep.bounds.c_star());
    out.push_float("max_norm_Emu", sweep.max_weighted_norm);
    out.push("monotone_all", sweep.all_monotone());
    out.push("bounds_ok_all", sweep.all_bounds_ok());
    out.artifact(&path);
    Ok(out)
}

pub fn spectrum_cmd(ctx: &Context) -> Result<RunSummary, CliError> {
    let tau = ctx.tau()?;
    let f = ctx.response()?;
    let (_, sol) = solve_wave_at(ctx, tau)?;
    let lim = LimitingCoefficients::from(&f);
    let rep = spectrum::essential_curves(&lim, sol.c, tau, ctx.cfg.xi_max, ctx.cfg.n_xi);
    let rows = (0..rep.xi.len()).map(|i| {
        format!(
            "{},{},{},{},{}",
            fmt_float(rep.xi[i]),
            fmt_float(rep.lambda_plus[i].0),
            fmt_float(rep.lambda_plus[i].1),
            fmt_float(rep.lambda_minus[i].0),
            fmt_float(rep.lambda_minus[i].1)
        )
    });
    let path = ctx.write_csv("spectrum.csv", "xi,re_plus,im_plus,re_minus,im_minus", rows)?;
    let mut out = RunSummary::new();
    out.push_float("tau", tau);
    out.push_float("c", sol.c);
    out.push("ns", rep.ns_satisfied);
    out.push_float("margin", rep.margin);
    out.push_float("max_re_plus", rep.max_re_plus);
    out.push_float("max_re_minus", rep.max_re_minus);
    out.artifact(&path);
    Ok(out)
}

pub fn simulate(ctx: &Context) -> Result<RunSummary, CliError> {
    let tau = ctx.tau()?;
    let f = ctx.response()?;
    let mut state = SimState::new(&f, &ctx.sim_options(), tau, sim::default_front)
        .map_err(|e| CliError::Computation(e.to_string()))?;
    state
        .run_until(ctx.cfg.t_final)
        .map_err(|e| CliError::Computation(e.to_string()))?;
    let fit = state
        .measure_speed_default()
        .map_err(|e| CliError::Computation(e.to_string()))?;
    let track_path = ctx.write_csv(
        "front_track.csv",
        "t,x_half",
        state
            .front_track
            .iter()
            .map(|(t, x)| format!("{},{}", fmt_float(*t), fmt_float(*x))),
    )?;
    let profile_path = ctx.write_csv(
        "final_profile.csv",
        "x,v",
        (0..state.n()).map(|i| format!("{},{}", fmt_float(state.x(i)), fmt_float(state.v[i]))),
    )?;
    let mut out = RunSummary::new();
    out.push_float("tau", tau);
    out.push_float("t_final", state.time());
    out.push_float("c_sim", fit.c_sim);
    out.push_float("stderr", fit.std_error);
    out.push("fit_points", fit.points);
    out.artifact(&track_path);
    out.artifact(&profile_path);
    Ok(out)
}

pub fn check(_ctx: &Context) -> Result<RunSummary, CliError> {
    let results = checks::run_all(|r| println!("{}", r.line()));
    let failed = results.iter().filter(|r| !r.passed).count();
    let mut out = RunSummary::new();
    out.push("criteria", results.len());
    out.push("passed", results.len() - failed);
    out.push("failed", failed);
    if failed > 0 {
        print!("{}", out.to_text());
        return Err(CliError::Computation(format!(
            "{failed} of {} criteria failed",
            results.len()
        )));
    }
    Ok(out)
}

pub fn run_command(name: &str, ctx: &Context) -> Result<RunSummary, CliError> {
    match name {
        "validate" => validate(ctx),
        "wave0" => wave0(ctx),
        "wave" => wave(ctx),
        "sweep" => sweep(ctx),
        "spectrum" => spectrum_cmd(ctx),
        "simulate" => simulate(ctx),
        "check" => check(ctx),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    }
}
