//! Flat `key = value` run configuration with dotted sections.
//!
//! ```text
//! # comment
//! params.kappa = 1
//! grid.ny = 768
//! scenario.kind = standard
//! ```
//!
//! Unknown keys, duplicate keys and malformed values are errors naming the key.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scenario::ScenarioKind;
use crate::solver::WeightBranch;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FarFieldChoice {
    Trivial,
    Decaying,
}

impl FromStr for FarFieldChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "trivial" => Ok(Self::Trivial),
            "decaying" => Ok(Self::Decaying),
            other => Err(format!("unknown far field `{other}` (expected trivial or decaying)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub kappa: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    /// `None` means the default pair `(1, κ)`.
    pub nu_u: Option<f64>,
    pub nu_b: Option<f64>,

    pub lx: f64,
    pub nx: usize,
    pub ymax: f64,
    pub ny: usize,
    pub dealias: f64,

    pub scenario: ScenarioKind,
    /// `None` picks decaying for the standard scenario with `κ ≠ 1`, trivial otherwise.
    pub far_field: Option<FarFieldChoice>,
    pub alpha: f64,

    pub t_final: f64,
    pub dt_max: f64,
    pub cfl: f64,
    pub sample_interval: f64,
    /// `None` means the κ-dependent default.
    pub weight: Option<WeightBranch>,
    pub audit_every: u64,
    pub seed: u64,

    /// `None` means `[t_final/10, t_final]`.
    pub fit_start: Option<f64>,
    pub fit_end: Option<f64>,

    pub output_dir: PathBuf,
    pub norms_file: String,
    pub summary_file: String,
    pub checkpoint_file: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            epsilon: 1e-3,
            delta: 0.1,
            lambda: 1.0,
            nu_u: None,
            nu_b: None,
            lx: 2.0 * std::f64::consts::PI,
            nx: 64,
            ymax: 180.0,
            ny: 768,
            dealias: 2.0 / 3.0,
            scenario: ScenarioKind::Standard,
            far_field: None,
            alpha: 2.5,
            t_final: 100.0,
            dt_max: 1e-2,
            cfl: 0.4,
            sample_interval: 0.5,
            weight: None,
            audit_every: 0,
            seed: 0,
            fit_start: None,
            fit_end: None,
            output_dir: PathBuf::from("."),
            norms_file: "norms.csv".into(),
            summary_file: "summary.json".into(),
            checkpoint_file: "final.ckpt".into(),
        }
    }
}

/// Every accepted key, in canonical order.
pub const KEYS: &[&str] = &[
    "params.kappa",
    "params.epsilon",
    "params.delta",
    "params.lambda",
    "params.nu_u",
    "params.nu_b",
    "grid.lx",
    "grid.nx",
    "grid.ymax",
    "grid.ny",
    "grid.dealias",
    "scenario.kind",
    "scenario.far_field",
    "scenario.alpha",
    "run.t_final",
    "run.dt_max",
    "run.cfl",
    "run.sample_interval",
    "run.weight",
    "run.audit_every",
    "run.seed",
    "fit.start",
    "fit.end",
    "output.dir",
    "output.norms",
    "output.summary",
    "output.checkpoint",
];

/// Keys a resumed run may change; everything else is fixed by the checkpoint.
pub const RESUMABLE_KEYS: &[&str] = &[
    "run.t_final",
    "run.dt_max",
    "run.cfl",
    "run.sample_interval",
    "run.audit_every",
    "fit.start",
    "fit.end",
    "output.dir",
    "output.norms",
    "output.summary",
    "output.checkpoint",
];

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| bad(key, format!("cannot parse `{value}`: {e}")))
}

fn scenario_name(s: ScenarioKind) -> &'static str {
    match s {
        ScenarioKind::Standard => "standard",
        ScenarioKind::Heat => "heat",
        ScenarioKind::Zero => "zero",
    }
}

impl RunConfig {
    /// Parses config text on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// As [`RunConfig::parse`], with `overrides` applied after the text and
    /// before validation.
    pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(line, format!("line {} is not `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(bad(key, "duplicate key"));
            }
            cfg.set(key, value)?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assigns one key without cross-field validation.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let f = |v: &str| parse::<f64>(key, v);
        match key {
            "params.kappa" => self.kappa = f(value)?,
            "params.epsilon" => self.epsilon = f(value)?,
            "params.delta" => self.delta = f(value)?,
            "params.lambda" => self.lambda = f(value)?,
            "params.nu_u" => self.nu_u = Some(f(value)?),
            "params.nu_b" => self.nu_b = Some(f(value)?),
            "grid.lx" => self.lx = f(value)?,
            "grid.nx" => self.nx = parse(key, value)?,
            "grid.ymax" => self.ymax = f(value)?,
            "grid.ny" => self.ny = parse(key, value)?,
            "grid.dealias" => self.dealias = f(value)?,
            "scenario.kind" => self.scenario = parse(key, value)?,
            "scenario.far_field" => self.far_field = Some(parse(key, value)?),
            "scenario.alpha" => self.alpha = f(value)?,
            "run.t_final" => self.t_final = f(value)?,
            "run.dt_max" => self.dt_max = f(value)?,
            "run.cfl" => self.cfl = f(value)?,
            "run.sample_interval" => self.sample_interval = f(value)?,
            "run.weight" => self.weight = Some(parse(key, value)?),
            "run.audit_every" => self.audit_every = parse(key, value)?,
            "run.seed" => self.seed = parse(key, value)?,
            "fit.start" => self.fit_start = Some(f(value)?),
            "fit.end" => self.fit_end = Some(f(value)?),
            "output.dir" => self.output_dir = PathBuf::from(value),
            "output.norms" => self.norms_file = value.to_string(),
            "output.summary" => self.summary_file = value.to_string(),
            "output.checkpoint" => self.checkpoint_file = value.to_string(),
            other => return Err(bad(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(key, format!("must be positive and finite, got {v}")))
            }
        };
        positive("params.kappa", self.kappa)?;
        positive("params.delta", self.delta)?;
        positive("params.lambda", self.lambda)?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(bad("params.epsilon", "must be nonnegative and finite"));
        }
        if let Some(v) = self.nu_u {
            positive("params.nu_u", v)?;
        }
        if let Some(v) = self.nu_b {
            positive("params.nu_b", v)?;
        }
        positive("grid.lx", self.lx)?;
        positive("grid.ymax", self.ymax)?;
        positive("run.t_final", self.t_final)?;
        positive("run.dt_max", self.dt_max)?;
        positive("run.cfl", self.cfl)?;
        positive("run.sample_interval", self.sample_interval)?;
        if self.sample_interval < self.dt_max {
            return Err(bad("run.sample_interval", "must be at least run.dt_max"));
        }
        if self.far_field() == FarFieldChoice::Decaying {
            if self.kappa == 1.0 {
                return Err(bad("scenario.far_field", "kappa = 1 requires the trivial far field"));
            }
            if self.scenario != ScenarioKind::Standard {
                return Err(bad("scenario.far_field", "a decaying far field needs the standard scenario"));
            }
            if !(self.alpha > 2.25) {
                return Err(bad("scenario.alpha", format!("must exceed 9/4, got {}", self.alpha)));
            }
        }
        for (key, name) in [
            ("output.norms", &self.norms_file),
            ("output.summary", &self.summary_file),
            ("output.checkpoint", &self.checkpoint_file),
        ] {
            if name.is_empty() {
                return Err(bad(key, "file name is empty"));
            }
        }
        let (start, end) = self.fit_window();
        if !(start < end) {
            return Err(bad("fit.start", "fit window is empty"));
        }
        Ok(())
    }

    pub fn far_field(&self) -> FarFieldChoice {
        self.far_field.unwrap_or(if self.scenario == ScenarioKind::Standard && self.kappa != 1.0 {
            FarFieldChoice::Decaying
        } else {
            FarFieldChoice::Trivial
        })
    }

    pub fn weight(&self) -> WeightBranch {
        self.weight.unwrap_or_else(|| WeightBranch::default_for(self.kappa))
    }

    pub fn fit_window(&self) -> (f64, f64) {
        (self.fit_start.unwrap_or(self.t_final / 10.0), self.fit_end.unwrap_or(self.t_final))
    }

    pub fn norms_path(&self) -> PathBuf {
        self.output_dir.join(&self.norms_file)
    }
    pub fn summary_path(&self) -> PathBuf {
        self.output_dir.join(&self.summary_file)
    }
    pub fn checkpoint_path(&self) -> PathBuf {
        self.output_dir.join(&self.checkpoint_file)
    }

    /// Canonical text listing every key; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("params.kappa", self.kappa.to_string());
        kv("params.epsilon", self.epsilon.to_string());
        kv("params.delta", self.delta.to_string());
        kv("params.lambda", self.lambda.to_string());
        if let Some(v) = self.nu_u {
            kv("params.nu_u", v.to_string());
        }
        if let Some(v) = self.nu_b {
            kv("params.nu_b", v.to_string());
        }
        kv("grid.lx", self.lx.to_string());
        kv("grid.nx", self.nx.to_string());
        kv("grid.ymax", self.ymax.to_string());
        kv("grid.ny", self.ny.to_string());
        kv("grid.dealias", self.dealias.to_string());
        kv("scenario.kind", scenario_name(self.scenario).into());
        if let Some(ff) = self.far_field {
            let name = match ff {
                FarFieldChoice::Trivial => "trivial",
                FarFieldChoice::Decaying => "decaying",
            };
            kv("scenario.far_field", name.into());
        }
        kv("scenario.alpha", self.alpha.to_string());
        kv("run.t_final", self.t_final.to_string());
        kv("run.dt_max", self.dt_max.to_string());
        kv("run.cfl", self.cfl.to_string());
        kv("run.sample_interval", self.sample_interval.to_string());
        if let Some(w) = self.weight {
            kv("run.weight", w.name().into());
        }
        kv("run.audit_every", self.audit_every.to_string());
        kv("run.seed", self.seed.to_string());
        if let Some(v) = self.fit_start {
            kv("fit.start", v.to_string());
        }
        if let Some(v) = self.fit_end {
            kv("fit.end", v.to_string());
        }
        kv("output.dir", self.output_dir.display().to_string());
        kv("output.norms", self.norms_file.clone());
        kv("output.summary", self.summary_file.clone());
        kv("output.checkpoint", self.checkpoint_file.clone());
        s
    }
}

/// Parses `key=value` override strings as given on the command line.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| bad(s, "override must be `key=value`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_round_trips() {
        let mut cfg = RunConfig::parse("params.kappa = 1.5\nrun.weight = psi_kappa\nfit.start = 3\n").unwrap();
        cfg.output_dir = PathBuf::from("/tmp/x");
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(cfg.far_field(), FarFieldChoice::Decaying);
    }

    #[test]
    fn errors_name_the_key() {
        let key = |text: &str| match RunConfig::parse(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        };
        assert_eq!(key("grid.nz = 3"), "grid.nz");
        assert_eq!(key("grid.nx = many"), "grid.nx");
        assert_eq!(key("grid.nx = 8\ngrid.nx = 16"), "grid.nx");
        assert_eq!(key("scenario.far_field = decaying"), "scenario.far_field");
        assert_eq!(key("run.sample_interval = 0.001"), "run.sample_interval");
        assert_eq!(key("params.kappa = 2\nscenario.alpha = 2"), "scenario.alpha");
    }
}
