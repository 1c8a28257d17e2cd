//! Sharp-interface radius equation and its closed-form checks.
//!
//! For circles and spheres the combined perimeter/bending flow reduces
//! to a scalar ODE for the radius. Two parameter choices have closed
//! forms: pure mean curvature flow gives R(t) = sqrt(R0^2 - 2t) in 2D,
//! and pure Willmore flow gives R(t) = (R0^4 + 2t)^{1/4}. The example
//! integrates both with the RK4 reference solver, prints the errors, and
//! estimates the convergence order by halving the step.
//!
//! Run with `cargo run --example radius_ode`.

use phaseflow::reference::{integrate_radius, RadiusState};

fn final_radius(r0: f64, l1: f64, l2: f64, t_end: f64, dt: f64) -> f64 {
    let curve = integrate_radius(RadiusState { r: r0, n: 2, t: 0.0 }, l1, l2, t_end, dt)
        .expect("radius integration");
    curve.samples.last().unwrap().r
}

fn main() {
    let t_mcf = 0.01;
    let exact_mcf = (0.09f64 - 2.0 * t_mcf).sqrt();
    let got_mcf = final_radius(0.3, 0.0, 1.0, t_mcf, 1e-5);
    println!("mean curvature: R(0.01) = {got_mcf:.12}, exact {exact_mcf:.12}, err {:.2e}",
        (got_mcf - exact_mcf).abs());

    let t_wil = 5e-4;
    let exact_wil = (0.2f64.powi(4) + 2.0 * t_wil).powf(0.25);
    let got_wil = final_radius(0.2, 1.0, 0.0, t_wil, 1e-6);
    println!("willmore:       R(5e-4) = {got_wil:.12}, exact {exact_wil:.12}, err {:.2e}",
        (got_wil - exact_wil).abs());

    println!();
    println!("{:>10} {:>12}", "dt", "error");
    let mut prev: Option<f64> = None;
    for k in 0..4 {
        let dt = 4e-4 / 2f64.powi(k);
        let err = (final_radius(0.3, 0.0, 1.0, t_mcf, dt) - exact_mcf).abs();
        match prev {
            Some(e) if err > 0.0 => {
                println!("{dt:>10.1e} {err:>12.2e}   order {:.2}", (e / err).log2())
            }
            _ => println!("{dt:>10.1e} {err:>12.2e}"),
        }
        prev = Some(err);
    }
}
