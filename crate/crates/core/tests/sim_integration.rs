//! Simulation-level integration tests: invariant region, co-moving
//! stationarity of an envelope wave, and continuation step regularity.

use delwave_core::continuation::continue_in_tau;
use delwave_core::nonlinearity::{EnvelopePair, ResponseFunction};
use delwave_core::profile::ProfileOptions;
use delwave_core::scalar_wave::{solve_nondelayed, Reaction, ShootOptions};
use delwave_core::sim::{self, default_front, SimOptions, SimState};

#[test]
fn invariant_region_for_reference_families() {
    // from monotone initial data in [0, 1] the field stays in
    // [-1e-8, 1 + 1e-8]; the delayed term can only push below zero at
    // discretization level
    let opts = SimOptions {
        l_sim: 40.0,
        dx: 0.05,
        dt_target: 0.01,
    };
    for (f, name) in [
        (ResponseFunction::family_a(), "A"),
        (ResponseFunction::family_b(), "B"),
        (ResponseFunction::family_c(), "C"),
    ] {
        let mut s = SimState::new(&f, &opts, 0.5, default_front).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        while s.time() < 10.0 {
            s.step().unwrap();
            for &v in &s.v {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        assert!(
            lo >= -1e-8 && hi <= 1.0 + 1e-8,
            "family {name}: range [{lo}, {hi}]"
        );
    }
}

#[test]
fn envelope_wave_stationary_in_comoving_frame() {
    // the lower-envelope wave evolved under its own dynamics, advected at
    // its own speed, stays put up to discretization error
    let f = ResponseFunction::family_a();
    let env = EnvelopePair::from_response(&f);
    let wave = solve_nondelayed(
        &Reaction::envelope_lower(&env),
        &ShootOptions {
            grid: delwave_core::grid::Grid::new(60.0, 2401),
            ..ShootOptions::precise()
        },
    )
    .unwrap();
    let opts = SimOptions {
        l_sim: 60.0,
        dx: 0.05,
        dt_target: 0.01,
    };
    let n = (2.0 * opts.l_sim / opts.dx).round() as usize + 1;
    let ic = sim::embed_profile(n, -opts.l_sim, opts.dx, &wave.grid, &wave.w);
    let env2 = env.clone();
    let ic2 = ic.clone();
    let mut s = SimState::with_reaction(
        Box::new(move |v| env2.lower(v)),
        wave.c,
        &opts,
        0.0,
        move |x| {
            let i = ((x + 60.0) / 0.05).round() as usize;
            ic2[i.min(n - 1)]
        },
    )
    .unwrap();
    s.run_until(5.0).unwrap();
    let drift = s
        .v
        .iter()
        .zip(&ic)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(drift <= 5e-3, "co-moving drift {drift}");
}

#[test]
fn continuation_steps_change_speed_slowly() {
    let sweep = continue_in_tau(
        &ResponseFunction::family_a(),
        0.3,
        0.1,
        &ProfileOptions::default(),
    )
    .unwrap();
    assert_eq!(sweep.steps.len(), 4);
    for pair in sweep.c_table().windows(2) {
        assert!(
            (pair[1].1 - pair[0].1).abs() <= 0.5,
            "speed jump between tau {} and {}",
            pair[0].0,
            pair[1].0
        );
    }
}

#[test]
fn continuation_handles_coarse_steps() {
    // a single 0 -> 2 jump converges only after several damped iterations;
    // with a tight iteration budget the sweep falls back to halved
    // sub-steps and still lands on the target multiples
    let opts = ProfileOptions {
        max_iter: 3,
        ..ProfileOptions::default()
    };
    let coarse = continue_in_tau(&ResponseFunction::family_a(), 2.0, 2.0, &opts).unwrap();
    assert_eq!(coarse.steps.len(), 2);
    let fine = continue_in_tau(
        &ResponseFunction::family_a(),
        2.0,
        0.1,
        &ProfileOptions::default(),
    )
    .unwrap();
    let c_coarse = coarse.steps[1].solution.c;
    let c_fine = fine.steps[20].solution.c;
    assert!(
        (c_coarse - c_fine).abs() < 1e-9,
        "{c_coarse} vs {c_fine}"
    );
}

#[test]
fn family_b_sweep_exercises_delayed_tail_root() {
    // kappa = 0.5 keeps the exponential term in the left-tail
    // characteristic equation alive, so the fitted rate checks the
    // transcendental prediction rather than the quadratic one
    let sweep = continue_in_tau(
        &ResponseFunction::family_b(),
        0.5,
        0.1,
        &ProfileOptions::default(),
    )
    .unwrap();
    assert!(sweep.all_monotone());
    for s in &sweep.steps {
        let d = s.solution.decay.as_ref().unwrap();
        let rm = (d.gamma_minus_fit - d.gamma_minus_pred).abs() / d.gamma_minus_pred;
        assert!(rm < 0.05, "tau {}: minus-side rel err {rm}", s.solution.tau);
        if s.solution.tau > 0.0 {
            // with the delay term active the root differs from the
            // kappa = 0 quadratic by a visible margin
            let quadratic =
                0.5 * (-s.solution.c + (s.solution.c * s.solution.c + 4.0f64).sqrt());
            assert!((d.gamma_minus_pred - quadratic).abs() > 1e-3);
        }
    }
}

#[test]
fn sweeps_are_deterministic() {
    let run = || {
        continue_in_tau(
            &ResponseFunction::family_c(),
            0.3,
            0.1,
            &ProfileOptions::default(),
        )
        .unwrap()
    };
    let a = run();
    let b = run();
    for (x, y) in a.steps.iter().zip(&b.steps) {
        assert_eq!(x.solution.c.to_bits(), y.solution.c.to_bits());
        assert_eq!(x.solution.weighted_norm.to_bits(), y.solution.weighted_norm.to_bits());
        assert_eq!(x.solution.u, y.solution.u);
    }
}
