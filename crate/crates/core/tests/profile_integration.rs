//! Integration tests of the delayed profile solver: operator/pinned
//! residuals, Jacobian directions, the speed functional, and solve
//! behaviour at small delays.

use delwave_core::cutoff;
use delwave_core::grid::Grid;
use delwave_core::nonlinearity::ResponseFunction;
use delwave_core::profile::{Mode, ProfileError, ProfileInit, ProfileOptions, ProfileProblem};
use delwave_core::scalar_wave::{self, Reaction, ShootOptions};

fn splitmix(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *seed;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z = z ^ (z >> 31);
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn family_a_wave_and_problem(tau: f64) -> (ProfileProblem, delwave_core::profile::WaveSolution) {
    let f = ResponseFunction::family_a();
    let wave = scalar_wave::solve_nondelayed(&Reaction::from_response(&f), &ShootOptions::precise())
        .unwrap();
    let opts = ProfileOptions::default();
    let mut sol = ProfileProblem::new(f, 0.0, opts.grid.clone())
        .solve(&ProfileInit::from_shooting(&wave), &opts)
        .unwrap();
    // walk the delay up in a couple of steps
    let mut t = 0.0;
    while t < tau - 1e-12 {
        t = (t + 0.25).min(tau);
        let problem = ProfileProblem::new(f, t, opts.grid.clone());
        sol = problem.solve(&ProfileInit::from_solution(&sol), &opts).unwrap();
    }
    (ProfileProblem::new(f, tau, opts.grid.clone()), sol)
}

#[test]
fn c_functional_oracles() {
    let grid = Grid::new(60.0, 2401);
    let problem = ProfileProblem::new(ResponseFunction::family_a(), 0.5, grid.clone());

    // w = e^{-|s|}: rho = 1/3 + 1/2, c = 0.5 ln (5/6)
    let u: Vec<f64> = (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            (-x.abs()).exp() - cutoff::psi(x)
        })
        .collect();
    let c = problem.c_functional(&u).unwrap();
    let exact = 0.5 * (5.0f64 / 6.0).ln();
    assert!((c - exact).abs() < 1e-6, "c = {c}, exact = {exact}");

    // u = 0 (w = psi): rho = 1 + int_0^1 (1 - S)^2 with the quintic
    // smoothstep; the integral is exactly 36/11 - 18 + 345/9 - 75/2 + 100/7
    let zero = vec![0.0; grid.n];
    let c_psi = problem.c_functional(&zero).unwrap();
    let integral = 36.0 / 11.0 - 18.0 + 345.0 / 9.0 - 75.0 / 2.0 + 100.0 / 7.0;
    let exact_psi = 0.5 * (1.0f64 + integral).ln();
    assert!(
        (c_psi - exact_psi).abs() < 1e-6,
        "c_psi = {c_psi}, exact = {exact_psi}"
    );

    // scaling identity: c(w / sqrt(rho)) = 0
    let rho = (2.0 * c).exp();
    let scale = 1.0 / rho.sqrt();
    let u_scaled: Vec<f64> = (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            scale * (-x.abs()).exp() - cutoff::psi(x)
        })
        .collect();
    let c0 = problem.c_functional(&u_scaled).unwrap();
    assert!(c0.abs() < 1e-12, "c0 = {c0}");
}

#[test]
fn c_functional_gradient_linearity_and_fd() {
    let grid = Grid::new(60.0, 2401);
    let problem = ProfileProblem::new(ResponseFunction::family_a(), 0.5, grid.clone());
    let u: Vec<f64> = (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            (-0.3 * x.abs()).exp() * 0.8 - cutoff::psi(x) + 0.9
        })
        .collect();
    let u: Vec<f64> = u.iter().map(|v| v - u[grid.n - 1]).collect();
    let mut seed = 7u64;
    let h: Vec<f64> = (0..grid.n)
        .map(|_| splitmix(&mut seed) * (-0.1 * (seed % 97) as f64).exp())
        .collect();

    let zero = vec![0.0; grid.n];
    assert_eq!(problem.c_functional_gradient(&u, &zero).unwrap(), 0.0);

    let g1 = problem.c_functional_gradient(&u, &h).unwrap();
    let h2: Vec<f64> = h.iter().map(|x| 2.0 * x).collect();
    let g2 = problem.c_functional_gradient(&u, &h2).unwrap();
    assert!((g2 - 2.0 * g1).abs() <= 1e-14 * g1.abs().max(1.0));

    // central finite differences, eps = 1e-5
    let eps = 1e-5;
    let up: Vec<f64> = u.iter().zip(&h).map(|(a, b)| a + eps * b).collect();
    let um: Vec<f64> = u.iter().zip(&h).map(|(a, b)| a - eps * b).collect();
    let fd = (problem.c_functional(&up).unwrap() - problem.c_functional(&um).unwrap()) / (2.0 * eps);
    assert!(
        (g1 - fd).abs() <= 1e-6 * fd.abs().max(1e-3),
        "gradient {g1} vs fd {fd}"
    );
}

#[test]
fn nonpositive_rho_reported() {
    // the zero field has rho = 0 exactly
    let grid = Grid::new(60.0, 2401);
    let problem = ProfileProblem::new(ResponseFunction::family_a(), 0.0, grid.clone());
    let u = ProfileInit::zero_field(&grid).u;
    match problem.c_functional(&u) {
        Err(ProfileError::NonpositiveRho { rho }) => assert_eq!(rho, 0.0),
        other => panic!("expected NonpositiveRho, got {other:?}"),
    }
}

#[test]
fn residual_trivial_fields() {
    let grid = Grid::new(60.0, 2401);
    let problem = ProfileProblem::new(ResponseFunction::family_b(), 0.7, grid.clone());
    // w = 0: every interior row vanishes (the reaction has the factor w and
    // the derivatives of a constant vanish); only the Dirichlet rows bite
    let w0 = vec![0.0; grid.n];
    let init = ProfileInit::from_w(&grid, &w0, -0.1);
    let r = problem.residual_pinned(&init.u, -0.1);
    for i in 1..grid.n - 1 {
        assert!(r[i].abs() < 1e-12, "row {i}: {}", r[i]);
    }
    // w = 1: same, because f(1) = 0 exactly
    let w1 = vec![1.0; grid.n];
    let init = ProfileInit::from_w(&grid, &w1, -0.1);
    let r = problem.residual_pinned(&init.u, -0.1);
    for i in 1..grid.n - 1 {
        assert!(r[i].abs() < 1e-12, "row {i}: {}", r[i]);
    }
}

#[test]
fn zero_shift_collapses_bitwise() {
    // tau = 0 and (tau > 0, c = 0) must evaluate through the identical
    // non-shifted path
    let grid = Grid::new(60.0, 2401);
    let f = ResponseFunction::family_a();
    let p0 = ProfileProblem::new(f, 0.0, grid.clone());
    let p5 = ProfileProblem::new(f, 0.5, grid.clone());
    let u: Vec<f64> = (0..grid.n)
        .map(|i| 1.0 / (1.0 + (0.8 * grid.x(i)).exp()) - cutoff::psi(grid.x(i)))
        .collect();
    let r0 = p0.residual_pinned(&u, 0.37);
    let r5 = p5.residual_pinned(&u, 0.0);
    // same rows wherever the speed multiplies nothing: compare the tau = 0
    // residual at c = 0 instead for bitwise equality
    let r0c = p0.residual_pinned(&u, 0.0);
    assert_eq!(r0c, r5);
    assert_ne!(r0, r0c);
}

#[test]
fn pinned_jacobian_matches_finite_differences() {
    let (problem, sol) = family_a_wave_and_problem(0.5);
    let n = problem.grid().n;
    let mut seed = 0xfeed_beefu64;
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let du: Vec<f64> = (0..n).map(|_| splitmix(&mut seed)).collect();
        let dc = splitmix(&mut seed);
        let jv = problem.jacobian_matvec_pinned(&sol.u, sol.c, &du, dc);
        let up: Vec<f64> = sol.u.iter().zip(&du).map(|(a, b)| a + eps * b).collect();
        let um: Vec<f64> = sol.u.iter().zip(&du).map(|(a, b)| a - eps * b).collect();
        let rp = problem.residual_pinned(&up, sol.c + eps * dc);
        let rm = problem.residual_pinned(&um, sol.c - eps * dc);
        let scale = jv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let fd = (rp[i] - rm[i]) / (2.0 * eps);
            worst = worst.max((jv[i] - fd).abs() / scale);
        }
    }
    assert!(worst <= 1e-5, "pinned jacobian rel error {worst}");
}

#[test]
fn operator_jacobian_matches_finite_differences_and_k_block_rank_one() {
    let (problem, sol) = family_a_wave_and_problem(0.5);
    let n = problem.grid().n;
    let mut seed = 0xabcd_0123u64;
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let mut k_blocks: Vec<Vec<f64>> = Vec::new();
    for _ in 0..10 {
        let du: Vec<f64> = (0..n).map(|_| splitmix(&mut seed)).collect();
        let jop = problem.jacobian_matvec_operator(&sol.u, &du).unwrap();
        let up: Vec<f64> = sol.u.iter().zip(&du).map(|(a, b)| a + eps * b).collect();
        let um: Vec<f64> = sol.u.iter().zip(&du).map(|(a, b)| a - eps * b).collect();
        let rp = problem.residual_operator(&up).unwrap();
        let rm = problem.residual_operator(&um).unwrap();
        let scale = jop.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let fd = (rp[i] - rm[i]) / (2.0 * eps);
            worst = worst.max((jop[i] - fd).abs() / scale);
        }
        // K block: difference between operator and fixed-speed directional
        // derivatives, both taken at the same speed c(u); must be a
        // multiple of one fixed vector
        let c_op = problem.c_functional(&sol.u).unwrap();
        let jfix = problem.jacobian_matvec_pinned(&sol.u, c_op, &du, 0.0);
        k_blocks.push(jop.iter().zip(&jfix).map(|(a, b)| a - b).collect());
    }
    assert!(worst <= 1e-5, "operator jacobian rel error {worst}");

    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let reference = k_blocks
        .iter()
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .unwrap()
        .clone();
    let rn = norm(&reference);
    assert!(rn > 0.0);
    for blk in &k_blocks {
        let b = norm(blk);
        if b > 1e-14 * rn {
            let cosine = dot(blk, &reference).abs() / (b * rn);
            assert!(
                (cosine - 1.0).abs() < 1e-9,
                "K-block directions disagree: cos = {cosine}"
            );
        }
    }
}

#[test]
fn delayed_solve_monotone_with_speed_in_bounds() {
    let f = ResponseFunction::family_a();
    let (_, sol) = family_a_wave_and_problem(0.5);
    assert_eq!(sol.tau, 0.5);
    assert!(sol.monotone);
    assert!(sol.interior_in_range());
    assert!(sol.residual <= 1e-10);
    // signed bounds: a leftward wave is bounded below by the upper-envelope
    // speed, and |c| never exceeds the larger envelope magnitude
    let sb = scalar_wave::speed_bounds(&f, &ShootOptions::default()).unwrap();
    assert!(sol.c < 0.0);
    assert!(
        sol.c >= sb.c1 - 1e-3,
        "c = {} below c1 = {}",
        sol.c,
        sb.c1
    );
    assert!(sol.c.abs() <= sb.c_star() + 1e-3);
}

#[test]
fn operator_mode_agrees_with_pinned_up_to_translation() {
    let f = ResponseFunction::family_a();
    let wave = scalar_wave::solve_nondelayed(&Reaction::from_response(&f), &ShootOptions::precise())
        .unwrap();
    let opts = ProfileOptions::default();
    let pinned = ProfileProblem::new(f, 0.25, opts.grid.clone())
        .solve(&ProfileInit::from_shooting(&wave), &opts)
        .unwrap();
    let op_opts = ProfileOptions {
        mode: Mode::Operator,
        ..ProfileOptions::default()
    };
    let problem = ProfileProblem::new(f, 0.25, op_opts.grid.clone());
    let op = problem
        .solve(&ProfileInit::from_solution(&pinned), &op_opts)
        .unwrap();
    assert_eq!(op.mode, Mode::Operator);
    // same wave, so the speeds agree to solver accuracy
    assert!(
        (op.c - pinned.c).abs() < 1e-8,
        "op c = {}, pinned c = {}",
        op.c,
        pinned.c
    );
    // and the speed functional of the operator solution equals its speed
    let cf = problem.c_functional(&op.u).unwrap();
    assert!((cf - op.c).abs() <= 1e-9, "c(u) = {cf} vs c = {}", op.c);
    assert!(op.monotone);
    // operator residual of the operator solution is small
    let r = problem.residual_operator(&op.u).unwrap();
    let sup = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(sup <= 1e-9, "operator residual {sup}");
}

#[test]
fn zero_field_init_does_not_converge() {
    let grid = Grid::new(60.0, 2401);
    let problem = ProfileProblem::new(ResponseFunction::family_a(), 0.5, grid.clone());
    let init = ProfileInit::zero_field(&grid);
    match problem.solve(&init, &ProfileOptions::default()) {
        Err(ProfileError::NoConvergence { .. }) | Err(ProfileError::ResidualNaN) => {}
        Err(ProfileError::SingularJacobian { .. }) => {}
        other => panic!("expected failure from the zero field, got {other:?}"),
    }
}

#[test]
fn decay_rates_attached_and_close_to_predictions() {
    let (_, sol) = family_a_wave_and_problem(0.5);
    let d = sol.decay.expect("decay fits attached");
    let rp = (d.gamma_plus_fit - d.gamma_plus_pred).abs() / d.gamma_plus_pred;
    let rm = (d.gamma_minus_fit - d.gamma_minus_pred).abs() / d.gamma_minus_pred;
    assert!(rp < 0.05, "plus-side rel err {rp}");
    assert!(rm < 0.05, "minus-side rel err {rm}");
}

#[test]
fn shooting_profile_nearly_annihilates_the_discrete_residual() {
    // the resampled non-delayed trajectory is an independent object; the
    // discrete profile operator evaluated on it must vanish to within the
    // discretization error
    let f = ResponseFunction::family_a();
    let wave = scalar_wave::solve_nondelayed(&Reaction::from_response(&f), &ShootOptions::precise())
        .unwrap();
    let problem = ProfileProblem::new(f, 0.0, wave.grid.clone());
    let init = ProfileInit::from_shooting(&wave);
    let r = problem.residual_pinned(&init.u, wave.c);
    let sup = r[1..wave.grid.n - 1]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(sup < 1e-5, "sup residual {sup}");
}
