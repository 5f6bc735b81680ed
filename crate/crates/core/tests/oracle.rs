mod common;

use proptest::prelude::*;

use hypstab_core::grid::{Domain, Grid};
use hypstab_core::oracle::{distance_to, upwind_closed_loop, upwind_linear, OracleClosure, UpwindGrid};
use hypstab_core::quasilinear::{picard_two_control, DiagonalSystem, PicardOptions};
use hypstab_core::transport::Coefficient;
use hypstab_core::{BoundaryTrace, Profile};

use common::{flattened_sine, half_power};

fn unit_speed() -> Coefficient {
    Coefficient::constant(1.0, Domain::new(1.0, 1.0, 1.0).unwrap()).unwrap()
}

fn linear_error(cells: usize) -> (f64, f64) {
    let g = UpwindGrid::with_cfl(cells, 1.0, 1.0, 1.0, 0.8).unwrap();
    let y0 = Profile::new(1.0, |x| x);
    let yb = BoundaryTrace::new(|t| -t, 1.0, 1.0);
    let y = upwind_linear(&unit_speed(), &y0, &yb, &g).unwrap();
    let exact = Grid::uniform(1.0, 1.0, 2001, 2001).unwrap().tabulate(|t, x| x - t);
    let (l1, linf) = distance_to(&y, &exact);
    (l1, linf)
}

#[test]
fn test_linear_exact_solution() {
    let (_, linf) = linear_error(400);
    assert!(linf <= 0.01, "{linf}");
}

#[test]
fn test_error_halves_with_mesh() {
    let (coarse, _) = linear_error(200);
    let (fine, _) = linear_error(400);
    let ratio = fine / coarse;
    assert!((0.4..=0.6).contains(&ratio), "{ratio}");
}

#[test]
fn test_zero_closed_loop() {
    let sys = DiagonalSystem::affine([1.0, 0.75, 0.25], [-1.0, 0.25, 0.75], 1.0).unwrap();
    let g = UpwindGrid::with_cfl(50, 1.0, 1.0, 1.1, 0.8).unwrap();
    let z = Profile::zero(1.0);
    let (u, v) = upwind_closed_loop(&sys, &z, &z, &OracleClosure::TwoControl, half_power(), &g).unwrap();
    assert_eq!(u.sup_norm() + v.sup_norm(), 0.0);
}

#[test]
fn test_constant_speeds_match_characteristics() {
    let sys = DiagonalSystem::affine([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 1.0).unwrap();
    let fb = half_power();
    let u0 = Profile::new(1.0, |x| 0.05 * (std::f64::consts::PI * x).cos());
    let v0 = flattened_sine(0.03);
    let grid = Grid::uniform(2.0, 1.0, 401, 201).unwrap();
    let sol = picard_two_control(&sys, &u0, &v0, fb, &grid, &PicardOptions::default()).unwrap();
    let g = UpwindGrid::with_cfl(400, 1.0, 2.0, 1.0, 0.8).unwrap();
    let (u, v) = upwind_closed_loop(&sys, &u0, &v0, &OracleClosure::TwoControl, fb, &g).unwrap();
    assert!(distance_to(&u, &sol.u).1 <= 0.01);
    assert!(distance_to(&v, &sol.v).1 <= 0.01);
}

#[test]
fn test_cfl_is_checked() {
    let sys = DiagonalSystem::affine([3.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 1.0).unwrap();
    let g = UpwindGrid::with_cfl(50, 1.0, 1.0, 1.0, 0.8).unwrap();
    let z = Profile::zero(1.0);
    assert!(upwind_closed_loop(&sys, &z, &z, &OracleClosure::TwoControl, half_power(), &g).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn test_upwind_maximum_principle(speed in 0.3f64..2.0, amp in -1.0f64..1.0, k in 1.6f64..6.0, bump in -1.0f64..1.0) {
        let a = Coefficient::constant(speed, Domain::new(1.0, 1.0, speed).unwrap()).unwrap();
        let g = UpwindGrid::with_cfl(80, 1.0, 1.0, speed, 0.9).unwrap();
        let y0 = Profile::new(1.0, move |x| amp * (k * x).sin());
        let yb = BoundaryTrace::new(move |t| bump * (5.0 * t).sin(), bump.abs(), 5.0 * bump.abs());
        let y = upwind_linear(&a, &y0, &yb, &g).unwrap();
        // convex combinations of data values never exceed the data bound
        prop_assert!(y.sup_norm() <= amp.abs().max(bump.abs()) + 1e-14);
    }
}
