//! Run orchestration behind the `mhdbl` subcommands.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::{RunConfig, FarFieldChoice, RESUMABLE_KEYS};
use crate::error::{Error, Result};
use crate::grid::{Bc, Field, GridSpec};
use crate::scenario::{
    default_decaying, default_shape, derived_exponents, initial_data_heat, initial_data_standard, FarField, Params,
    ScenarioKind,
};
use crate::solver::checkpoint;
use crate::solver::{Model, NormSeries, SimConfig, Simulation};
use crate::verify::{audit_summary, fit_power_law, theta_report, AuditSummary, DecayFit, ThetaReport};

/// Columns of `norms.csv`, in order.
pub const CSV_COLUMNS: [&str; 8] = [
    "t",
    "theta",
    "radius",
    "norm_ub",
    "norm_gh",
    "norm_dy_gh",
    "norm_phipsi",
    "cl_dyub_sq",
];

/// Fitted quantities reported in the summary.
pub const FIT_COLUMNS: [&str; 4] = ["norm_ub", "norm_gh", "norm_dy_gh", "norm_phipsi"];

impl Error {
    /// Process exit status: 2 for input problems, 3 when the analytic band
    /// closes, 4 on divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::Checkpoint(_)
            | Error::Csv(_)
            | Error::InvalidGrid(_)
            | Error::InvalidParams(_)
            | Error::UnsupportedScenario(_)
            | Error::InitialData(_)
            | Error::InsufficientResolution(_)
            | Error::InsufficientSamples { .. }
            | Error::Json(_) => 2,
            Error::TStarReached { .. } => 3,
            Error::Divergence { .. } => 4,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    TStarReached,
    Diverged,
}

/// A fit, or the reason none was possible.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum FitEntry {
    Fit(DecayFit),
    Unavailable { error: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub quantity: String,
    #[serde(flatten)]
    pub result: FitEntry,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub status: RunStatus,
    pub message: Option<String>,
    pub t_final: f64,
    pub t_reached: f64,
    pub steps: u64,
    pub kappa: f64,
    pub weight: &'static str,
    pub l_kappa: Option<f64>,
    pub ell_kappa: Option<f64>,
    pub fit_window: [f64; 2],
    pub exponents: Vec<FitReport>,
    pub theta: ThetaReport,
    pub audit: Option<AuditSummary>,
    pub max_flux_drift: f64,
    pub flux_drift_rate: f64,
}

/// Builds the model, initial data and solver settings of a config.
pub fn build_simulation(cfg: &RunConfig) -> Result<Simulation> {
    let mut params = Params::new(cfg.kappa, cfg.epsilon, cfg.delta, cfg.lambda)?;
    if cfg.nu_u.is_some() || cfg.nu_b.is_some() {
        params = params.with_diffusivities(cfg.nu_u.unwrap_or(params.nu_u), cfg.nu_b.unwrap_or(params.nu_b))?;
    }
    let grid = GridSpec::new(cfg.lx, cfg.nx, cfg.ymax, cfg.ny)?.with_dealias(cfg.dealias)?;
    let farfield = match cfg.far_field() {
        FarFieldChoice::Trivial => FarField::trivial(),
        FarFieldChoice::Decaying => default_decaying(&params, &grid, cfg.alpha)?,
    };
    let weight = cfg.weight();
    let (u0, b0) = match cfg.scenario {
        ScenarioKind::Standard => {
            let (u0, b0, _) = initial_data_standard(&grid, &params, &default_shape(&grid), weight.multiple(cfg.kappa))?;
            (u0, b0)
        }
        ScenarioKind::Heat => initial_data_heat(&grid),
        ScenarioKind::Zero => (Field::zeros(grid, Bc::Dirichlet), Field::zeros(grid, Bc::Neumann)),
    };
    let model = Model::new(params, grid, farfield)?;
    let sim_config = SimConfig {
        dt_max: cfg.dt_max,
        cfl: cfg.cfl,
        sample_interval: cfg.sample_interval,
        weight,
        audit_every: cfg.audit_every,
    };
    Simulation::new(model, sim_config, u0, b0)
}

/// Writes the eight documented columns, one row per sample.
pub fn write_norms_csv(series: &NormSeries, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for s in &series.samples {
        let row = [s.t, s.theta, s.radius, s.norm_ub, s.norm_gh, s.norm_dy_gh, s.norm_phipsi, s.cl_dyub_sq];
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

/// Reads the `t` column and one named column of a norms CSV.
pub fn read_csv_column(path: &Path, quantity: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Config {
            key: name.to_string(),
            reason: format!("column not found in {}", path.display()),
        })
    };
    let (it, iq) = (find("t")?, find(quantity)?);
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let get = |i: usize| -> Result<f64> {
            let cell = rec.get(i).unwrap_or("");
            cell.trim()
                .parse()
                .map_err(|_| Error::Csv(format!("row {}: `{cell}` is not a number", n + 1)))
        };
        times.push(get(it)?);
        values.push(get(iq)?);
    }
    Ok((times, values))
}

/// Power-law fit of one CSV column over `window`.
pub fn fit_csv(path: &Path, quantity: &str, window: (f64, f64)) -> Result<DecayFit> {
    let (times, values) = read_csv_column(path, quantity)?;
    fit_power_law(&times, &values, window)
}

fn summarize(sim: &Simulation, cfg: &RunConfig, status: RunStatus, message: Option<String>) -> Summary {
    let window = cfg.fit_window();
    let exponents = FIT_COLUMNS
        .iter()
        .map(|q| {
            let values = sim.series.column(q).expect("known column");
            let result = match fit_power_law(&sim.series.times(), &values, window) {
                Ok(fit) => FitEntry::Fit(fit),
                Err(e) => FitEntry::Unavailable { error: e.to_string() },
            };
            FitReport {
                quantity: q.to_string(),
                result,
            }
        })
        .collect();
    let p = sim.params();
    let ex = derived_exponents(p.kappa).ok();
    let audit = (sim.config.audit_every > 0).then(|| audit_summary(&sim.audit, sim.config.dt_max, sim.grid().dy()));
    Summary {
        status,
        message,
        t_final: cfg.t_final,
        t_reached: sim.state.t,
        steps: sim.state.step,
        kappa: p.kappa,
        weight: sim.config.weight.name(),
        l_kappa: ex.and_then(|e| e.l_kappa),
        ell_kappa: ex.and_then(|e| e.ell_kappa),
        fit_window: [window.0, window.1],
        exponents,
        theta: theta_report(&sim.series, p.delta, p.lambda),
        audit,
        max_flux_drift: sim.state.max_flux_drift,
        flux_drift_rate: sim.summary_flux_drift_rate(),
    }
}

/// Advances to `cfg.t_final` and writes `norms.csv`, `summary.json` and the
/// final checkpoint. When the band closes or the run diverges the CSV and the
/// summary are still written (the checkpoint too, unless the state is
/// non-finite) and the error is returned.
pub fn execute(sim: &mut Simulation, cfg: &RunConfig) -> Result<Summary> {
    fs::create_dir_all(&cfg.output_dir)?;
    let err = sim.run_until(cfg.t_final).err();
    let status = match err {
        None => RunStatus::Completed,
        Some(Error::TStarReached { .. }) => RunStatus::TStarReached,
        Some(Error::Divergence { .. }) => RunStatus::Diverged,
        Some(e) => return Err(e),
    };
    let message = err.as_ref().map(|e| e.to_string());
    write_norms_csv(&sim.series, &cfg.norms_path())?;
    let summary = summarize(sim, cfg, status, message);
    fs::write(cfg.summary_path(), serde_json::to_string_pretty(&summary)?)?;
    if status != RunStatus::Diverged {
        checkpoint::save(sim, &cfg.to_text(), &cfg.checkpoint_path())?;
    }
    match err {
        None => Ok(summary),
        Some(e) => Err(e),
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<Summary> {
    let mut sim = build_simulation(cfg)?;
    execute(&mut sim, cfg)
}

/// Loads a checkpoint, applies `overrides` (only run, fit and output keys)
/// and continues to the new final time.
pub fn resume(path: &Path, overrides: &[(String, String)]) -> Result<Summary> {
    let (mut sim, text) = checkpoint::load(path)?;
    let mut cfg = RunConfig::parse(&text)?;
    for (k, v) in overrides {
        if !RESUMABLE_KEYS.contains(&k.as_str()) {
            return Err(Error::Config {
                key: k.clone(),
                reason: "cannot be changed when resuming".into(),
            });
        }
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    sim.config.dt_max = cfg.dt_max;
    sim.config.cfl = cfg.cfl;
    sim.config.sample_interval = cfg.sample_interval;
    sim.config.audit_every = cfg.audit_every;
    execute(&mut sim, &cfg)
}

/// Sets the global worker count from `MHDBL_THREADS` (default: all cores).
pub fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("MHDBL_THREADS") else {
        return Ok(());
    };
    let n: usize = value.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Error::Config {
        key: "MHDBL_THREADS".into(),
        reason: format!("expected a positive integer, got `{value}`"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config {
            key: "MHDBL_THREADS".into(),
            reason: e.to_string(),
        })
}
