//! JSON run configuration and its merge with command-line flags.

use std::path::{Path, PathBuf};

use eulimit::godunov::{Boundary, CompactSet, Grid1D};
use eulimit::limit_harness::SweepConfig;
use eulimit::{BoundBudget, Theta};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Left and right `(rho, u)` pairs.
pub type StatePair = ((f64, f64), (f64, f64));

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VacuumTag {
    #[serde(rename = "vacuum")]
    Vacuum,
}

/// A density given as a number or as the literal `"vacuum"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Density {
    Value(f64),
    Tag(VacuumTag),
}

impl Density {
    pub fn value(self) -> f64 {
        match self {
            Density::Value(v) => v,
            Density::Tag(VacuumTag::Vacuum) => 0.0,
        }
    }
}

impl std::str::FromStr for Density {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("vacuum") {
            return Ok(Density::Tag(VacuumTag::Vacuum));
        }
        s.parse::<f64>()
            .map(Density::Value)
            .map_err(|_| format!("expected a number or \"vacuum\", got {s:?}"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiemannSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_l: Option<Density>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_r: Option<Density>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryName {
    Outflow,
    Periodic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryName>,
    /// Position of the initial discontinuity; defaults to the midpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
}

impl std::str::FromStr for BoundaryName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "outflow" => Ok(BoundaryName::Outflow),
            "periodic" => Ok(BoundaryName::Periodic),
            _ => Err(format!("expected outflow or periodic, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_grid: Option<Vec<f64>>,
}

/// Space-time rectangle used by the dissipation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactSection {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub spec: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub riemann: RiemannSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub sweep: SweepSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compact_set: Option<CompactSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        Self {
            spec: SCHEMA_VERSION,
            theta: None,
            riemann: RiemannSection::default(),
            grid: GridSection::default(),
            sim: SimSection::default(),
            sweep: SweepSection::default(),
            compact_set: None,
            output_dir: None,
        }
    }
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("{name} must be finite, got {v}")))
    }
}

fn required<T>(name: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| config_err(format!("missing {name}")))
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfigFile =
            serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))?;
        if cfg.spec != SCHEMA_VERSION {
            return Err(config_err(format!(
                "unsupported config schema spec = {}, expected {SCHEMA_VERSION}",
                cfg.spec
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `θ ∈ [0, 0.99]`; with `allow_one` the exact solver's extended range
    /// `[0, 1]`.
    pub fn theta(&self, allow_one: bool) -> Result<Theta, CliError> {
        let t = finite("--theta", required("--theta", self.theta)?)?;
        let theta = if allow_one { Theta::new_extended(t) } else { Theta::new(t) };
        theta.map_err(|e| config_err(e.to_string()))
    }

    /// `((ρ_L, u_L), (ρ_R, u_R))`; a vacuum side has velocity 0 if none is given.
    pub fn riemann_data(&self) -> Result<StatePair, CliError> {
        let r = &self.riemann;
        let rho_l = required("--rho-l", r.rho_l)?.value();
        let rho_r = required("--rho-r", r.rho_r)?.value();
        let u_l = if rho_l == 0.0 { r.u_l.unwrap_or(0.0) } else { required("--u-l", r.u_l)? };
        let u_r = if rho_r == 0.0 { r.u_r.unwrap_or(0.0) } else { required("--u-r", r.u_r)? };
        for (name, v) in [("--rho-l", rho_l), ("--u-l", u_l), ("--rho-r", rho_r), ("--u-r", u_r)] {
            finite(name, v)?;
        }
        if rho_l < 0.0 || rho_r < 0.0 {
            return Err(config_err("densities must be nonnegative"));
        }
        Ok(((rho_l, u_l), (rho_r, u_r)))
    }

    pub fn grid(&self, default_n: usize) -> Result<Grid1D, CliError> {
        let g = &self.grid;
        let x_min = finite("--xmin", g.x_min.unwrap_or(-1.0))?;
        let x_max = finite("--xmax", g.x_max.unwrap_or(1.0))?;
        let boundary = match g.boundary.unwrap_or(BoundaryName::Outflow) {
            BoundaryName::Outflow => Boundary::Outflow,
            BoundaryName::Periodic => Boundary::Periodic,
        };
        Grid1D::new(x_min, x_max, g.n_cells.unwrap_or(default_n), boundary)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn x0(&self, grid: &Grid1D) -> Result<f64, CliError> {
        finite("--x0", self.grid.x0.unwrap_or(0.5 * (grid.x_min + grid.x_max)))
    }

    pub fn t_end(&self) -> Result<f64, CliError> {
        finite("--t", required("--t", self.sim.t_end)?)
    }

    pub fn cfl(&self) -> Result<f64, CliError> {
        finite("cfl", self.sim.cfl.unwrap_or(0.5))
    }

    pub fn snapshots(&self) -> Result<Vec<f64>, CliError> {
        let s = self.sim.snapshots.clone().unwrap_or_default();
        for &t in &s {
            finite("snapshot time", t)?;
        }
        Ok(s)
    }

    pub fn sweep(&self) -> Result<SweepConfig, CliError> {
        let d = SweepConfig::default();
        let s = &self.sweep;
        let w0 = finite("w0", s.w0.unwrap_or(d.w0.value()))?;
        let cfg = SweepConfig {
            thetas: s.thetas.clone().unwrap_or(d.thetas),
            sample_count: s.samples.unwrap_or(d.sample_count),
            seed: s.seed.unwrap_or(d.seed),
            w0: BoundBudget::new(w0).map_err(|e| config_err(e.to_string()))?,
            xi_grid: s.xi_grid.clone().unwrap_or(d.xi_grid),
        };
        cfg.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(cfg)
    }

    /// Configured set, or `t ∈ [0.2T, 0.6T]` times the middle half of the grid.
    pub fn compact_set(&self, grid: &Grid1D, t_end: f64) -> Result<CompactSet, CliError> {
        let (t, x) = match self.compact_set {
            Some(c) => ((c.t_min, c.t_max), (c.x_min, c.x_max)),
            None => {
                let (a, b) = (grid.x_min, grid.x_max);
                ((0.2 * t_end, 0.6 * t_end), (a + 0.25 * (b - a), b - 0.25 * (b - a)))
            }
        };
        CompactSet::new(t, x).map_err(|e| config_err(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
        "spec": 1,
        "theta": 0.25,
        "riemann": {"rho_l": "vacuum", "rho_r": 2, "u_r": 0.5},
        "grid": {"x_min": -2, "x_max": 2, "n_cells": 100, "boundary": "periodic"},
        "sim": {"cfl": 0.4, "t_end": 0.3, "snapshots": [0.1, 0.2]},
        "sweep": {"thetas": [0.1, 0.05, 0.025, 0.0125], "samples": 50, "seed": 9, "w0": 1.5, "xi_grid": [0.0, 0.2]},
        "compact_set": {"t_min": 0.05, "t_max": 0.15, "x_min": -0.5, "x_max": 0.5},
        "output_dir": "results"
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfigFile::parse(FULL).unwrap();
        assert_eq!(cfg.riemann.rho_l, Some(Density::Tag(VacuumTag::Vacuum)));
        assert_eq!(cfg.riemann_data().unwrap(), ((0.0, 0.0), (2.0, 0.5)));
        assert_eq!(cfg.grid(10).unwrap().boundary, Boundary::Periodic);
        assert_eq!(cfg.sweep().unwrap().sample_count, 50);
        let echo = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfigFile::parse(&echo).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(RunConfigFile::parse(r#"{"theta": 0.1}"#).is_err());
        assert!(RunConfigFile::parse(r#"{"spec": 2}"#).is_err());
        assert!(RunConfigFile::parse(r#"{"spec": 1, "colour": 1}"#).is_err());
        assert!(RunConfigFile::parse(r#"{"spec": 1, "grid": {"cells": 4}}"#).is_err());
        assert!(RunConfigFile::parse(r#"{"spec": 1, "riemann": {"rho_l": "void"}}"#).is_err());
        let cfg = RunConfigFile::parse(r#"{"spec": 1, "theta": 1.5}"#).unwrap();
        assert!(cfg.theta(true).is_err());
        let cfg = RunConfigFile::parse(r#"{"spec": 1, "riemann": {"rho_l": 1, "u_l": 0, "u_r": 0}}"#).unwrap();
        let err = cfg.riemann_data().unwrap_err();
        assert_eq!(err.to_string(), "missing --rho-r");
    }

    #[test]
    fn density_flags() {
        assert_eq!("vacuum".parse::<Density>().unwrap().value(), 0.0);
        assert_eq!("1.5".parse::<Density>().unwrap().value(), 1.5);
        assert!("x".parse::<Density>().is_err());
    }
}
