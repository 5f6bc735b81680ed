mod common;

use proptest::prelude::*;

use hypstab_core::grid::{Domain, Grid};
use hypstab_core::oracle::{distance_to, upwind_linear, UpwindGrid};
use hypstab_core::transport::{
    entrance_derivatives, entrance_time, flow, integrate_characteristic, solution_gradient, solve_linear_transport,
    Coefficient, EntranceClass, TransportOptions,
};
use hypstab_core::{BoundaryTrace, Profile};

use common::stationary_entrance;

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn unit_domain(floor: f64) -> Domain {
    Domain::new(1.0, 1.0, floor).unwrap()
}

fn wavy() -> Coefficient {
    Coefficient::analytic(unit_domain(0.9), |_, x| 1.0 + 0.1 * (TAU * x).sin())
        .unwrap()
        .with_derivative(|_, x| 0.1 * TAU * (TAU * x).cos())
        .with_lipschitz(0.1 * TAU)
}

fn ramp() -> Coefficient {
    Coefficient::analytic(unit_domain(1.0), |_, x| 1.0 + 0.1 * x)
        .unwrap()
        .with_derivative(|_, _| 0.1)
        .with_lipschitz(0.1)
}

/// Pointwise transport solution straight from the characteristic record.
fn pointwise(a: &Coefficient, y0: &impl Fn(f64) -> f64, yb: &impl Fn(f64) -> f64, t: f64, x: f64, step: f64) -> f64 {
    let r = integrate_characteristic(a, t, x, step).unwrap();
    match r.class {
        EntranceClass::J => yb(r.entrance_time),
        _ => y0(r.foot),
    }
}

#[test]
fn test_constant_speed_records() {
    let a = Coefficient::constant(1.0, unit_domain(1.0)).unwrap();
    let step = 1e-3;
    let r = integrate_characteristic(&a, 0.5, 0.8, step).unwrap();
    assert_eq!(r.class, EntranceClass::I);
    assert_eq!(r.entrance_time, 0.0);
    assert!((r.foot - 0.3).abs() < 1e-12);
    let (e, class) = entrance_time(&a, 0.8, 0.5, step).unwrap();
    assert_eq!(class, EntranceClass::J);
    assert!((e - 0.3).abs() < 1e-9);
    assert_eq!(entrance_time(&a, 0.7, 0.7, step).unwrap().1, EntranceClass::P);
    assert_eq!(entrance_time(&a, 0.2, 0.9, step).unwrap().0, 0.0);

    let fast = Coefficient::constant(2.0, Domain::new(1.0, 1.0, 2.0).unwrap()).unwrap();
    let (e, _) = entrance_time(&fast, 1.0, 0.5, 1e-3).unwrap();
    assert!((e - 0.75).abs() < 1e-9);
    let (dt, dx) = entrance_derivatives(&fast, 1.0, 0.5, 1e-3).unwrap();
    assert!((dt - 1.0).abs() < 1e-12 && (dx + 0.5).abs() < 1e-12);
}

#[test]
fn test_entrance_time_against_quadrature() {
    let a = Coefficient::analytic(unit_domain(0.9), |_, x| 1.0 + 0.1 * x.sin()).unwrap();
    let (e, class) = entrance_time(&a, 0.9, 0.4, 1e-3).unwrap();
    let (reference, _) = stationary_entrance(|x| 1.0 + 0.1 * x.sin(), 0.9, 0.4);
    assert_eq!(class, EntranceClass::J);
    assert!((e - reference).abs() < 1e-10, "{e} vs {reference}");

    let r = integrate_characteristic(&a, 0.2, 0.9, 1e-3).unwrap();
    let (_, foot) = stationary_entrance(|x| 1.0 + 0.1 * x.sin(), 0.2, 0.9);
    assert!((r.foot - foot).abs() < 1e-10);
}

#[test]
fn test_entrance_derivatives_finite_difference() {
    let a = ramp();
    let step = 1e-3;
    let h = 1e-5;
    for &(t, x) in &[(0.9, 0.3), (0.7, 0.5), (0.95, 0.1)] {
        let (dt, dx) = entrance_derivatives(&a, t, x, step).unwrap();
        let e = |t: f64, x: f64| entrance_time(&a, t, x, step).unwrap().0;
        let fd_t = (e(t + h, x) - e(t - h, x)) / (2.0 * h);
        let fd_x = (e(t, x + h) - e(t, x - h)) / (2.0 * h);
        assert!((dt - fd_t).abs() <= 1e-4, "∂t e {dt} vs {fd_t}");
        assert!((dx - fd_x).abs() <= 1e-4, "∂x e {dx} vs {fd_x}");
    }
    assert!(entrance_derivatives(&a, 0.2, 0.9, step).is_err());
}

#[test]
fn test_solution_gradient_on_i_and_j() {
    let a = ramp();
    let step = 1e-3;
    let y0 = |x: f64| x.cos();
    let yb = |t: f64| (2.0 * t).cos();
    let h = 1e-5;
    for &(t, x) in &[(0.3, 0.8), (0.9, 0.3)] {
        let (gt, gx) = solution_gradient(&a, t, x, |x| -x.sin(), |t| -2.0 * (2.0 * t).sin(), step).unwrap();
        let y = |t: f64, x: f64| pointwise(&a, &y0, &yb, t, x, step);
        let fd_t = (y(t + h, x) - y(t - h, x)) / (2.0 * h);
        let fd_x = (y(t, x + h) - y(t, x - h)) / (2.0 * h);
        assert!((gt - fd_t).abs() < 1e-5, "({t},{x}) ∂t {gt} vs {fd_t}");
        assert!((gx - fd_x).abs() < 1e-5, "({t},{x}) ∂x {gx} vs {fd_x}");
    }
}

#[test]
fn test_matches_upwind_oracle() {
    let a = wavy();
    let pi = std::f64::consts::PI;
    let y0 = Profile::with_bounds(1.0, move |x| (pi * x).cos(), 1.0, pi);
    let yb = BoundaryTrace::new(|t| t.cos(), 1.0, 1.0);
    let grid = Grid::uniform(1.0, 1.0, 401, 401).unwrap();
    let y = solve_linear_transport(&a, &y0, &yb, &grid, &TransportOptions::default()).unwrap();
    let ug = UpwindGrid::with_cfl(400, 1.0, 1.0, 1.1, 0.9).unwrap();
    let oracle = upwind_linear(&a, &y0, &yb, &ug).unwrap();
    let (_, linf) = distance_to(&oracle, &y);
    assert!(linf <= 0.02, "L∞ distance {linf}");
}

#[test]
fn test_lookback_agrees_with_exact_tracing() {
    let a = wavy();
    let y0 = Profile::new(1.0, |x| (3.0 * x).sin());
    let yb = BoundaryTrace::new(|t| -(2.0 * t).sin(), 1.0, 2.0);
    let gap = |nx: usize| {
        let grid = Grid::uniform(1.0, 1.0, 2 * nx - 1, nx).unwrap();
        let fast = solve_linear_transport(&a, &y0, &yb, &grid, &TransportOptions::default()).unwrap();
        let exact = solve_linear_transport(&a, &y0, &yb, &grid, &TransportOptions::exact()).unwrap();
        (fast.sup_distance(&exact), grid.dx())
    };
    // the label has a slope jump on the corner characteristic, so the
    // interpolated labels agree to first order in the mesh width
    let (coarse, dx) = gap(51);
    let (fine, _) = gap(101);
    assert!(coarse <= 0.05 * dx, "{coarse}");
    assert!(fine <= 0.6 * coarse, "{fine} after {coarse}");
}

#[test]
fn test_entrance_time_stability_under_perturbation() {
    let grid = Grid::uniform(1.0, 1.0, 41, 41).unwrap();
    let step = 1e-3;
    let base = wavy();
    let e_of = |a: &Coefficient| grid.tabulate(|t, x| entrance_time(a, t, x, step).unwrap().0);
    let reference = e_of(&base);
    let mut prev = f64::INFINITY;
    for n in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let an = Coefficient::analytic(unit_domain(0.8), move |t, x| {
            1.0 + 0.1 * (TAU * x).sin() + 0.1 / n * (3.0 * x + t).cos()
        })
        .unwrap();
        let d = e_of(&an).sup_distance(&reference);
        assert!(d <= 1.1 * prev, "distance {d} after {prev}");
        prev = d;
    }
    assert!(prev < 5e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn test_maximum_principle(speed in 0.5f64..2.0, negative in any::<bool>(), amp in -2.0f64..2.0,
                              k in 1.6f64..4.0, bump in -1.0f64..1.0, omega in 4.8f64..8.0) {
        let a_val = if negative { -speed } else { speed };
        let a = Coefficient::constant(a_val, unit_domain(speed)).unwrap();
        let y0 = Profile::new(1.0, move |x| amp * (k * x).sin());
        let inflow = if negative { 1.0 } else { 0.0 };
        let y_in = y0.eval(inflow);
        let yb = BoundaryTrace::new(move |t| y_in + bump * (omega * t).sin(), y_in.abs() + bump.abs(), bump.abs() * omega);
        let grid = Grid::uniform(1.0, 1.0, 41, 41).unwrap();
        let y = solve_linear_transport(&a, &y0, &yb, &grid, &TransportOptions::default()).unwrap();
        // both data attain their extrema on the unit interval
        let data_sup = amp.abs().max(y_in.abs() + bump.abs());
        prop_assert!(y.sup_norm() <= data_sup + 1e-12);
    }

    #[test]
    fn test_flow_semigroup(s in 0.3f64..0.6, r in 0.3f64..0.6, t in 0.3f64..0.6, x in 0.4f64..0.6) {
        let a = Coefficient::analytic(unit_domain(0.8), |t, x| 1.0 + 0.1 * (TAU * x).sin() + 0.05 * t).unwrap();
        let step = 1e-3;
        let direct = flow(&a, s, t, x, step);
        let composed = flow(&a, s, r, flow(&a, r, t, x, step), step);
        prop_assert!((direct - composed).abs() <= 1e-8, "{} vs {}", direct, composed);
    }

    #[test]
    fn test_flow_lipschitz(p in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), q in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)) {
        let a = wavy();
        let step = 1e-3;
        let dist = (p.0 - q.0).abs() + (p.1 - q.1).abs() + (p.2 - q.2).abs();
        let gap = (flow(&a, p.0, p.1, p.2, step) - flow(&a, q.0, q.1, q.2, step)).abs();
        prop_assert!(gap <= a.flow_lipschitz() * dist * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn test_entrance_time_lipschitz(p in (0.0f64..1.0, 0.0f64..1.0), q in (0.0f64..1.0, 0.0f64..1.0)) {
        let a = wavy();
        let step = 1e-3;
        let dist = (p.0 - q.0).abs() + (p.1 - q.1).abs();
        let gap = (entrance_time(&a, p.0, p.1, step).unwrap().0 - entrance_time(&a, q.0, q.1, step).unwrap().0).abs();
        prop_assert!(gap <= a.entrance_lipschitz() * dist * (1.0 + 1e-6) + 1e-8);
    }
}
