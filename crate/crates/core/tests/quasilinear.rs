mod common;

use hypstab_core::error::Error;
use hypstab_core::grid::Grid;
use hypstab_core::network::{balance_inflow, EdgeData};
use hypstab_core::quasilinear::{
    picard_one_control, picard_two_control, verify_extinction, BoundaryMap, ClosedLoopProblem, DiagonalSystem,
    InitialGuess, LeftClosure, PicardOptions,
};
use hypstab_core::saintvenant::{pick_c, simple_node_map, CanalParams};
use hypstab_core::Profile;

use common::{affine_system, flattened_sine, half_power};

fn linear_system() -> DiagonalSystem {
    DiagonalSystem::affine([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 1.0).unwrap()
}

fn affine_horizon(amplitude: f64) -> f64 {
    1.0 + half_power().extinction_time_from(amplitude)
}

#[test]
fn test_constant_speeds_exact() {
    let fb = half_power();
    let u0 = Profile::new(1.0, |x| 0.05 * (std::f64::consts::PI * x).cos());
    let v0 = Profile::new(1.0, |x| 0.03 * (2.0 * x).sin());
    let grid = Grid::uniform(2.5, 1.0, 251, 101).unwrap();
    let sol = picard_two_control(&linear_system(), &u0, &v0, fb, &grid, &PicardOptions::default()).unwrap();
    // the operator ignores the iterate, so the second application changes nothing
    assert_eq!(sol.iterations, 2);
    assert_eq!(sol.residual_history[1], 0.0);
    let (tu, tv) = (fb.trace(u0.eval(0.0)), fb.trace(v0.eval(1.0)));
    let exact_u = grid.tabulate(|t, x| if x >= t { u0.eval(x - t) } else { tu.eval(t - x) });
    let exact_v = grid.tabulate(|t, x| {
        if x + t <= 1.0 {
            v0.eval(x + t)
        } else {
            tv.eval(t - (1.0 - x))
        }
    });
    assert!(sol.u.sup_distance(&exact_u) < 1e-12);
    assert!(sol.v.sup_distance(&exact_v) < 1e-12);

    let report = verify_extinction(&sol, tu.extinction_time().max(tv.extinction_time()) + 1.0, 1e-12);
    assert_eq!(report.sup_u + report.sup_v, 0.0);
    assert!(report.u_left_entry.unwrap() <= tu.extinction_time() + grid.dt());
    assert!(report.v_right_entry.unwrap() <= tv.extinction_time() + grid.dt());
}

#[test]
fn test_zero_data_gives_zero() {
    let grid = Grid::uniform(1.0, 1.0, 21, 21).unwrap();
    let z = Profile::zero(1.0);
    let sol = picard_two_control(&affine_system(), &z, &z, half_power(), &grid, &PicardOptions::default()).unwrap();
    assert_eq!(sol.iterations, 1);
    assert_eq!(sol.u.sup_norm() + sol.v.sup_norm(), 0.0);
    let one = picard_one_control(
        &affine_system(),
        &z,
        &z,
        &BoundaryMap::reflection(),
        half_power(),
        &grid,
        &PicardOptions::default(),
    )
    .unwrap();
    assert_eq!(one.u.sup_norm() + one.v.sup_norm(), 0.0);
}

#[test]
fn test_fixed_point_and_uniqueness() {
    let data = flattened_sine(0.02);
    let grid = Grid::uniform(affine_horizon(0.02), 1.0, 201, 51).unwrap();
    let opts = PicardOptions::default();
    let problem = ClosedLoopProblem {
        system: affine_system(),
        u0: data.clone(),
        v0: data.clone(),
        feedback: half_power(),
        left: LeftClosure::Feedback,
        grid: grid.clone(),
    };
    let sol = problem.solve(&opts).unwrap();
    let (u1, v1) = problem.apply(&sol.u, &sol.v, &opts).unwrap();
    assert!(u1.sup_distance(&sol.u).max(v1.sup_distance(&sol.v)) <= 2.0 * opts.tol);

    let from_zero = problem
        .solve(&PicardOptions {
            initial_guess: InitialGuess::Zero,
            ..opts
        })
        .unwrap();
    assert!(from_zero.u.sup_distance(&sol.u).max(from_zero.v.sup_distance(&sol.v)) <= 10.0 * opts.tol);

    // the feedback trace is imposed, not solved
    let trace = half_power().trace(data.eval(0.0));
    for (k, &t) in grid.t_nodes().iter().enumerate() {
        assert_eq!(sol.u.at(k, 0), trace.eval(t));
        assert_eq!(sol.u_left[k], trace.eval(t));
    }
    // residuals shrink once the iteration has started
    for w in sol.residual_history[1..].windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn test_iterates_stay_in_domain() {
    let (c1, c2) = (0.002, 0.01);
    let data = flattened_sine(c1);
    assert!(data.lipschitz() <= c2);
    let grid = Grid::uniform(affine_horizon(c1), 1.0, 201, 51).unwrap();
    let opts = PicardOptions {
        bounds: Some((c1, c2)),
        ..PicardOptions::default()
    };
    let sol = picard_two_control(&affine_system(), &data, &data, half_power(), &grid, &opts).unwrap();
    assert!(hypstab_core::quasilinear::check_two_control(&sol.ledger).holds);
    let c3 = sol.ledger.c3;
    for s in &sol.iterate_stats {
        assert!(s.sup_u.max(s.sup_v) <= 1.02 * c1);
        assert!(s.lip_u.max(s.lip_v) <= 1.02 * c3);
    }
}

#[test]
fn test_extinction_is_permanent() {
    let data = flattened_sine(0.02);
    let t = affine_horizon(0.02);
    let grid = Grid::uniform(1.5 * t, 1.0, 601, 101).unwrap();
    let sol = picard_two_control(
        &affine_system(),
        &data,
        &data,
        half_power(),
        &grid,
        &PicardOptions::default(),
    )
    .unwrap();
    let k0 = grid.time_index_at_or_after(t);
    let mut prev = f64::INFINITY;
    for k in k0..grid.nt() {
        let s = sol.u.row_sup(k) + sol.v.row_sup(k);
        assert!(s <= 5e-3 && s <= prev);
        prev = s;
    }
}

#[test]
fn test_reflection_with_constant_speeds() {
    let fb = half_power();
    let u0 = flattened_sine(0.02);
    let v0 = flattened_sine(0.02);
    let t_star = fb.trace(v0.eval(1.0)).extinction_time();
    let grid = Grid::uniform(3.0 + t_star, 1.0, 401, 101).unwrap();
    let sol = picard_one_control(
        &linear_system(),
        &u0,
        &v0,
        &BoundaryMap::reflection(),
        fb,
        &grid,
        &PicardOptions::default(),
    )
    .unwrap();
    for (k, &t) in grid.t_nodes().iter().enumerate() {
        if t >= 1.0 + t_star + 1e-9 {
            assert!(sol.v.row_sup(k) < 1e-12, "v at {t}");
        }
        if t >= 2.0 + t_star + 1e-9 {
            assert!(sol.u.row_sup(k) < 1e-12, "u at {t}");
        }
    }
}

#[test]
fn test_saint_venant_simple_node_extinction() {
    let p = CanalParams::new(1.0, 0.5, 9.81, 1.0).unwrap();
    let c = pick_c(&[p]).unwrap();
    let h0 = Profile::flattened_sine(1.0, 1.0, 1e-3, 1.0, 0.0, 0.1);
    let v0 = balance_inflow(&h0, &Profile::constant(1.0, 0.5), p.q_star());
    let data = EdgeData::from_physical(p, &h0, &v0).unwrap();
    let fb = half_power();
    let t_star = fb.extinction_time_from(data.u0.sup().max(data.v0.sup()));
    let bound = 2.0 / c + t_star;
    let grid = Grid::uniform(1.2 * bound, 1.0, 481, 101).unwrap();
    let h = simple_node_map(&p, c).unwrap();
    let sol = picard_one_control(
        &p.diagonal_system(c).unwrap(),
        &data.u0,
        &data.v0,
        &h,
        fb,
        &grid,
        &PicardOptions::default(),
    )
    .unwrap();
    let k0 = grid.time_index_at_or_after(bound);
    for k in k0..grid.nt() {
        assert!(sol.u.row_sup(k) + sol.v.row_sup(k) <= 5e-3);
    }
}

#[test]
fn test_failure_modes() {
    let grid = Grid::uniform(1.0, 1.0, 41, 21).unwrap();
    let fb = half_power();
    let data = flattened_sine(0.02);

    let tight = PicardOptions {
        bounds: Some((0.005, 0.1)),
        ..PicardOptions::default()
    };
    let err = picard_two_control(&affine_system(), &data, &data, fb, &grid, &tight).unwrap_err();
    assert!(matches!(err, Error::WorkingBoxExit { .. }), "{err}");

    let fragile = DiagonalSystem::affine([0.1, 10.0, 0.0], [-1.0, 0.0, 0.0], 0.1).unwrap();
    let dip = flattened_sine(-0.02);
    let err = picard_two_control(&fragile, &dip, &dip, fb, &grid, &PicardOptions::default()).unwrap_err();
    assert!(matches!(err, Error::CoefficientSignLoss { .. }), "{err}");

    let once = PicardOptions {
        max_iter: 1,
        ..PicardOptions::default()
    };
    let err = picard_two_control(&affine_system(), &data, &data, fb, &grid, &once).unwrap_err();
    assert!(matches!(err, Error::NoConvergence { max_iter: 1, .. }), "{err}");

    let lifted = Profile::constant(1.0, 0.01);
    let err = picard_one_control(
        &affine_system(),
        &lifted,
        &Profile::zero(1.0),
        &BoundaryMap::reflection(),
        fb,
        &grid,
        &PicardOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::CompatibilityViolation { .. }), "{err}");
}
