//! Frozen first-computation values. These are not external oracles; they
//! pin the solver outputs so that refactors cannot silently shift them.
//! Tolerances are far looser than solver accuracy but far tighter than any
//! physically meaningful change.

use delwave_core::continuation::continue_in_tau;
use delwave_core::nonlinearity::ResponseFunction;
use delwave_core::profile::ProfileOptions;
use delwave_core::scalar_wave::{speed_bounds, ShootOptions};

fn close(actual: f64, frozen: f64, what: &str) {
    let tol = 1e-6 * frozen.abs().max(1e-3);
    assert!(
        (actual - frozen).abs() <= tol,
        "{what}: {actual} drifted from frozen {frozen}"
    );
}

#[test]
fn envelope_speed_fixtures() {
    let sb_a = speed_bounds(&ResponseFunction::family_a(), &ShootOptions::default()).unwrap();
    close(sb_a.c0, -0.2452868828549981, "A c0");
    close(sb_a.c1, -0.2455919561907649, "A c1");
    let sb_c = speed_bounds(&ResponseFunction::family_c(), &ShootOptions::default()).unwrap();
    close(sb_c.c0, 0.05017214920371771, "C c0");
    close(sb_c.c1, 0.05016855429857969, "C c1");
    assert!(sb_a.c1 <= sb_a.c0 && sb_c.c1 <= sb_c.c0);
}

#[test]
fn sweep_speed_and_norm_fixtures() {
    let sweep_a = continue_in_tau(
        &ResponseFunction::family_a(),
        2.0,
        0.1,
        &ProfileOptions::default(),
    )
    .unwrap();
    close(sweep_a.steps[0].solution.c, -0.24558325843460352, "A c(0)");
    close(sweep_a.steps[10].solution.c, -0.1315275175192432, "A c(1)");
    close(sweep_a.steps[20].solution.c, -0.09056727899604951, "A c(2)");
    close(sweep_a.max_weighted_norm, 32.81595414271509, "A max norm");

    let sweep_c = continue_in_tau(
        &ResponseFunction::family_c(),
        2.0,
        0.1,
        &ProfileOptions::default(),
    )
    .unwrap();
    close(sweep_c.steps[0].solution.c, 0.0501688465943949, "C c(0)");
    close(sweep_c.steps[10].solution.c, 0.029910408199566023, "C c(1)");
    close(sweep_c.steps[20].solution.c, 0.02128084269130603, "C c(2)");
    close(sweep_c.max_weighted_norm, 33.537060627527154, "C max norm");
}
