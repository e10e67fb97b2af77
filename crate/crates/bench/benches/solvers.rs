use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use delwave_core::continuation::continue_in_tau;
use delwave_core::grid::Grid;
use delwave_core::nonlinearity::{EnvelopePair, ResponseFunction};
use delwave_core::profile::{ProfileInit, ProfileOptions, ProfileProblem};
use delwave_core::scalar_wave::{solve_nondelayed, Reaction, ShootOptions};
use delwave_core::sim::{default_front, SimOptions, SimState};
use delwave_core::spectrum::{essential_curves, LimitingCoefficients};

fn bench_shooting(c: &mut Criterion) {
    c.bench_function("shoot_nagumo_tol1e8", |b| {
        let r = Reaction::nagumo(0.3);
        let opts = ShootOptions::default();
        b.iter(|| solve_nondelayed(black_box(&r), &opts).unwrap().c)
    });
}

fn bench_profile_newton(c: &mut Criterion) {
    let f = ResponseFunction::family_a();
    let opts = ProfileOptions::default();
    let wave = solve_nondelayed(
        &Reaction::from_response(&f),
        &ShootOptions {
            grid: opts.grid.clone(),
            ..ShootOptions::precise()
        },
    )
    .unwrap();
    let tau0 = ProfileProblem::new(f, 0.0, opts.grid.clone());
    let sol0 = tau0.solve(&ProfileInit::from_shooting(&wave), &opts).unwrap();
    let problem = ProfileProblem::new(f, 0.25, opts.grid.clone());
    let init = ProfileInit::from_solution(&sol0);
    c.bench_function("profile_newton_tau025_n2401", |b| {
        b.iter(|| problem.solve(black_box(&init), &opts).unwrap().c)
    });
}

fn bench_sweep(c: &mut Criterion) {
    let f = ResponseFunction::family_a();
    let opts = ProfileOptions::default();
    let mut g = c.benchmark_group("continuation");
    g.sample_size(10);
    g.bench_function("sweep_tau0_to_1_dtau01", |b| {
        b.iter(|| continue_in_tau(black_box(&f), 1.0, 0.1, &opts).unwrap().steps.len())
    });
    g.finish();
}

fn bench_sim_steps(c: &mut Criterion) {
    let f = ResponseFunction::family_a();
    let opts = SimOptions::default();
    c.bench_function("sim_100_steps_n6001", |b| {
        b.iter_with_setup(
            || SimState::new(&f, &opts, 0.5, default_front).unwrap(),
            |mut s| {
                for _ in 0..100 {
                    s.step().unwrap();
                }
                s.v[100]
            },
        )
    });
}

fn bench_spectrum(c: &mut Criterion) {
    let lim = LimitingCoefficients {
        f_at_zero: 1.2,
        fprime_at_one: 0.0,
    };
    c.bench_function("spectrum_curves_n4001", |b| {
        b.iter(|| essential_curves(black_box(&lim), -0.17, 0.5, 20.0, 4001).margin)
    });
}

fn bench_envelopes_and_norm(c: &mut Criterion) {
    let f = ResponseFunction::family_a();
    c.bench_function("envelope_tabulation_4097", |b| {
        b.iter(|| EnvelopePair::from_response(black_box(&f)).lower(0.5))
    });
    let grid = Grid::new(60.0, 2401);
    let u: Vec<f64> = (0..grid.n).map(|i| (-grid.x(i).abs()).exp()).collect();
    c.bench_function("weighted_norm_n2401", |b| {
        b.iter(|| delwave_core::diagnostics::weighted_norm(black_box(&u), &grid, 0.5))
    });
}

criterion_group!(
    benches,
    bench_shooting,
    bench_profile_newton,
    bench_sweep,
    bench_sim_steps,
    bench_spectrum,
    bench_envelopes_and_norm
);
criterion_main!(benches);
