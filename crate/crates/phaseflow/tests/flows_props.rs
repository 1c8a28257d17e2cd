//! Cross-grid consistency and stationarity properties of the flows.
//!
//! The first test justifies running benchmark flows on coarse grids: at
//! fixed eps the diffuse perimeter of a disk is already grid-converged
//! at m = 64, so radius extraction does not depend on the transform
//! size. The second test pins the advertised stationarity budget of the
//! combined flow and documents a real limitation of the diffuse model
//! at desk-scale resolution; see the comment on the test.

use phaseflow::energies::perimeter_ag;
use phaseflow::flows::{run_simulation, FlowParams, Scheme};
use phaseflow::geometry::{initialize, ShapeSpec};
use phaseflow::profile1d::ProfileModel;
use phaseflow::spectral::TorusGrid;

fn disk(m: usize, eps: f64, r: f64) -> phaseflow::spectral::ScalarField {
    let grid = TorusGrid::new(2, m, eps);
    initialize(
        grid,
        &ShapeSpec::Ball {
            center: vec![0.0, 0.0],
            radius: r,
        },
    )
}

#[test]
fn coarse_grid_perimeter_matches_fine_grid() {
    let model = ProfileModel::new();
    let eps = 1.0 / 64.0;
    for (r, tol) in [(0.3, 1e-5), (0.4, 1e-3)] {
        let coarse = perimeter_ag(&disk(64, eps, r), &model).unwrap();
        let fine = perimeter_ag(&disk(256, eps, r), &model).unwrap();
        let rel = (coarse - fine).abs() / fine;
        println!("perimeter at r = {r}: m=64 {coarse:.8}, m=256 {fine:.8}, rel {rel:.2e}");
        assert!(rel < tol, "grid disagreement {rel:.2e} at r = {r}");
    }
}

// A disk at the balance radius r* = sqrt(lambda1_o / (2 lambda2_o)) of
// the sharp-interface radius equation should stay put. At finite eps it
// does not, quite: the stationary radius of the diffuse flow sits above
// r* by an offset that scales like eps^2 and does not depend on r*
// (measured with the standard scheme, disks near equilibrium: +13.3%
// of r* at eps = 1/32, +2.85% at eps = 1/64, +2.7% here). Meeting the
// advertised 1% budget therefore needs eps = 1/128, but the bending
// term caps the stable step near 10 eps^4, and 0.1 time units at
// eps = 1/128 is 2.7 million steps, far outside a test budget (larger
// steps were tried and the scheme goes non-finite within a few hundred
// steps). The budget is asserted as stated, at the finest feasible
// resolution, and the test documents the measured offset when it fails.
#[test]
fn disk_at_the_balance_radius_stays_within_the_drift_budget() {
    let eps: f64 = 1.0 / 64.0;
    let dt = 10.0 * eps.powi(4);
    let (lambda1_o, lambda2_o): (f64, f64) = (1.0, 25.0 / 8.0);
    let r_star: f64 = (lambda1_o / (2.0 * lambda2_o)).sqrt();
    let u0 = disk(64, eps, r_star);
    let p = FlowParams::new(eps, lambda1_o, lambda2_o, dt).unwrap();
    let traj = run_simulation(&u0, &p, Scheme::Standard, 0.1, &mut []).unwrap();

    let r0 = traj[0].radius_estimate;
    let mut drift: f64 = 0.0;
    for point in &traj {
        drift = drift.max((point.radius_estimate - r0).abs());
    }
    println!(
        "disk at r* = {r_star}: extracted start {r0:.5}, max drift {:.3}% of r* \
         (budget 1%); the drift is the eps^2 equilibrium offset described above",
        100.0 * drift / r_star
    );
    assert!(
        drift < 0.01 * r_star,
        "drift {:.3}% of r* exceeds the 1% stationarity budget; the diffuse \
         equilibrium sits ~2.7% above r* at eps = 1/64 and the offset only \
         closes at resolutions outside the test budget",
        100.0 * drift / r_star
    );
}
