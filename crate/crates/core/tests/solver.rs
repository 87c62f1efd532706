mod common;

use std::f64::consts::PI;

use mhdbl_core::grid::{Bc, Field, GridSpec};
use mhdbl_core::scenario::{default_shape, initial_data_standard, FarField, Params};
use mhdbl_core::solver::{Model, SimConfig, Simulation};
use mhdbl_core::Error;

#[test]
fn heat_solution_is_second_order_in_time() {
    let e = common::heat_errors(512, 20.0, 1e-3);
    println!("heat: continuum error {:.3e}, semi-discrete errors {:.3e} {:.3e}", e.exact, e.semi.0, e.semi.1);
    assert!(e.exact < 1e-4);
    assert!((3.5..=4.5).contains(&e.ratio()), "ratio {}", e.ratio());
}

#[test]
fn heat_run_keeps_the_band_closed_form() {
    // x-independent data carry no B^{1/2,0} energy, so θ never moves
    let grid = GridSpec::new(2.0 * PI, 8, 20.0, 129).unwrap();
    let model = Model::new(Params::new(1.0, 1e-3, 0.1, 1.0).unwrap(), grid, FarField::trivial()).unwrap();
    let (u0, b0) = mhdbl_core::scenario::initial_data_heat(&grid);
    let mut sim = Simulation::new(model, SimConfig::new(1.0), u0, b0).unwrap();
    sim.run_until(1.0).unwrap();
    assert!(sim.series.samples.iter().all(|s| s.theta == 0.0 && s.norm_ub == 0.0));
}

#[test]
fn nonzero_boundary_rows_are_cleared() {
    let grid = GridSpec::new(2.0 * PI, 8, 20.0, 65).unwrap();
    let model = Model::new(Params::new(1.0, 1e-3, 0.1, 1.0).unwrap(), grid, FarField::trivial()).unwrap();
    let u0 = Field::from_fn(grid, Bc::Dirichlet, |x, y| 1e-4 * x.sin() * (-y * y).exp());
    let b0 = Field::from_fn(grid, Bc::Neumann, |x, y| 1e-4 * x.cos() * (-y * y).exp());
    let sim = Simulation::new(model, SimConfig::new(1.0), u0, b0).unwrap();
    assert!(sim.state.u.row(0).iter().all(|z| z.norm() == 0.0));
    assert!(sim.state.u.row(grid.ny - 1).iter().all(|z| z.norm() == 0.0));
    assert!(sim.state.b.row(grid.ny - 1).iter().all(|z| z.norm() == 0.0));
    assert!(sim.state.b.row(0).iter().any(|z| z.norm() > 0.0));
}

#[test]
fn closed_band_stops_the_run() {
    let grid = GridSpec::new(2.0 * PI, 16, 20.0, 129).unwrap();
    let params = Params::new(1.0, 1e-2, 0.1, 400.0).unwrap();
    let (u0, b0, _) = initial_data_standard(&grid, &params, &default_shape(&grid), 1.0).unwrap();
    let mut sim = Simulation::new(Model::new(params, grid, FarField::trivial()).unwrap(), SimConfig::new(1.0), u0, b0).unwrap();
    match sim.run_until(5.0) {
        Err(Error::TStarReached { t, theta }) => {
            assert!(t < 5.0);
            assert!(0.1 - 400.0 * theta <= 0.0);
        }
        other => panic!("expected the band to close, got {other:?}"),
    }
}

#[test]
fn truncated_domain_trips_the_tail_guard() {
    let grid = GridSpec::new(2.0 * PI, 16, 12.0, 129).unwrap();
    let params = Params::new(1.0, 1e-3, 0.1, 1.0).unwrap();
    let (u0, b0, _) = initial_data_standard(&grid, &params, &default_shape(&grid), 1.0).unwrap();
    let mut sim = Simulation::new(Model::new(params, grid, FarField::trivial()).unwrap(), SimConfig::new(1.0), u0, b0).unwrap();
    match sim.run_until(20.0) {
        Err(Error::TailViolation { y }) => assert!(y > 0.8 * 12.0 - 1e-9),
        other => panic!("expected a tail violation, got {other:?}"),
    }
}

#[test]
fn early_audit_on_a_long_domain_is_finite() {
    // e^{2Ψ} overflows near y = 90 at t = 0 while the fields there are exactly zero
    let cfg = mhdbl_core::config::RunConfig::parse(
        "grid.nx = 16\ngrid.ny = 385\ngrid.ymax = 90\nrun.t_final = 0.5\nrun.audit_every = 5\nrun.sample_interval = 0.1\n",
    )
    .unwrap();
    let mut sim = mhdbl_core::run::build_simulation(&cfg).unwrap();
    sim.run_until(0.5).unwrap();
    assert!(!sim.audit.is_empty());
    assert!(sim.audit.iter().all(|r| r.lhs.is_finite() && r.rhs.is_finite() && r.lhs != 0.0));
    let summary = mhdbl_core::verify::audit_summary(&sim.audit, cfg.dt_max, sim.grid().dy());
    assert!(summary.pass && summary.min_relative_slack > 0.0, "{summary:?}");
}
