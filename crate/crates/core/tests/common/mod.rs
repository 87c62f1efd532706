#![allow(dead_code)]

use std::f64::consts::PI;

use mhdbl_core::grid::GridSpec;
use mhdbl_core::scenario::{heat_exact, initial_data_heat, FarField, Params};
use mhdbl_core::solver::{Model, SimConfig, Simulation};

/// Exact solution of the semi-discrete heat problem `f' = ν D₂ f` with
/// Dirichlet rows at both ends, by a discrete sine expansion.
pub fn semi_discrete_heat(values: &[f64], h: f64, nu: f64, t: f64) -> Vec<f64> {
    let n = values.len() - 1;
    let mut out = vec![0.0; n + 1];
    for k in 1..n {
        let s = (k as f64 * PI / (2.0 * n as f64)).sin();
        let lam = -4.0 * nu * s * s / (h * h);
        let c: f64 = (1..n).map(|j| values[j] * (j as f64 * k as f64 * PI / n as f64).sin()).sum::<f64>() * 2.0 / n as f64;
        let amp = c * (lam * t).exp();
        for (j, o) in out.iter_mut().enumerate().take(n).skip(1) {
            *o += amp * (j as f64 * k as f64 * PI / n as f64).sin();
        }
    }
    out
}

/// Wall-normal profile at `t = 1` of the x-independent heat datum.
pub fn heat_run(ny: usize, ymax: f64, dt: f64) -> (Vec<f64>, GridSpec) {
    let grid = GridSpec::new(2.0 * PI, 8, ymax, ny).unwrap();
    let params = Params::new(1.0, 1e-3, 0.1, 1.0).unwrap();
    let model = Model::new(params, grid, FarField::trivial()).unwrap();
    let (u0, b0) = initial_data_heat(&grid);
    let mut cfg = SimConfig::new(1.0);
    cfg.dt_max = dt;
    cfg.sample_interval = 0.25;
    let mut sim = Simulation::new(model, cfg, u0, b0).unwrap();
    sim.run_until(1.0).unwrap();
    let u = sim.state.u.to_physical();
    ((0..ny).map(|i| u.at(i, 0)).collect(), grid)
}

pub struct HeatErrors {
    /// Max error against the continuum solution at `dt`.
    pub exact: f64,
    /// Max errors against the semi-discrete solution at `dt` and `dt/2`.
    pub semi: (f64, f64),
}

impl HeatErrors {
    pub fn ratio(&self) -> f64 {
        self.semi.0 / self.semi.1
    }
}

pub fn heat_errors(ny: usize, ymax: f64, dt: f64) -> HeatErrors {
    let (u1, grid) = heat_run(ny, ymax, dt);
    let (u2, _) = heat_run(ny, ymax, dt / 2.0);
    let init: Vec<f64> = grid.ys().iter().map(|&y| y * (-0.5 * y * y).exp()).collect();
    let semi = semi_discrete_heat(&init, grid.dy(), 1.0, 1.0);
    let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let exact: Vec<f64> = grid.ys().iter().map(|&y| heat_exact(1.0, y, 1.0)).collect();
    HeatErrors {
        exact: max_diff(&u1, &exact),
        semi: (max_diff(&u1, &semi), max_diff(&u2, &semi)),
    }
}
