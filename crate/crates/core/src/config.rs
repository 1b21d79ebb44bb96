//! Run descriptions: a preset plus optional overrides, read from TOML or JSON.
//!
//! ```toml
//! preset = "table1"
//!
//! [system]
//! ej_ghz = 0.15
//! phi_rad = 1.5707963267948966
//! [system.h]
//! temperature_mk = 600.0
//!
//! [solver]
//! dims = [10, 48, 8]
//! rtol = 1e-8
//!
//! [experiment]
//! kind = "steady"
//!
//! [output]
//! dir = "out/table1"
//! format = "both"
//! ```
//!
//! Unknown keys are rejected. A key whose stem names a known field but whose
//! unit suffix differs (`temperature_k` for `temperature_mk`) is reported as
//! a unit mismatch.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::EvolveOptions;
use crate::error::{Error, Result};
use crate::fock::Mode;
use crate::model::SystemParams;
use crate::presets::{self, Experiment};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorOverrides {
    pub omega_ghz: Option<f64>,
    pub kappa_ghz: Option<f64>,
    pub temperature_mk: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemOverrides {
    pub c: Option<OscillatorOverrides>,
    pub h: Option<OscillatorOverrides>,
    pub r: Option<OscillatorOverrides>,
    pub ej_ghz: Option<f64>,
    pub phi_rad: Option<f64>,
    pub resonance_tol: Option<f64>,
}

impl SystemOverrides {
    pub fn apply(&self, params: &mut SystemParams) {
        for (mode, o) in [(Mode::C, &self.c), (Mode::H, &self.h), (Mode::R, &self.r)] {
            if let Some(o) = o {
                let osc = params.oscillator_mut(mode);
                if let Some(v) = o.omega_ghz {
                    osc.omega_ghz = v;
                }
                if let Some(v) = o.kappa_ghz {
                    osc.kappa_ghz = v;
                }
                if let Some(v) = o.temperature_mk {
                    osc.temperature_mk = v;
                }
                if let Some(v) = o.lambda {
                    osc.lambda = v;
                }
            }
        }
        if let Some(v) = self.ej_ghz {
            params.ej_ghz = v;
        }
        if let Some(v) = self.phi_rad {
            params.phi_rad = v;
        }
        if let Some(v) = self.resonance_tol {
            params.resonance_tol = v;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Fock truncation (c, h, r); the preset's when absent.
    pub dims: Option<[usize; 3]>,
    /// Grow the truncation until the steady observables settle.
    pub auto_truncate: bool,
    /// Relative change accepted by the truncation refinement.
    pub certify_tol: f64,
    pub certify_step: usize,
    /// Largest composite dimension the refinement may reach.
    pub max_dim: usize,
    pub rtol: f64,
    pub atol: f64,
    /// Steady-state residual tolerance; 1e-10·D when absent.
    pub steady_tol: Option<f64>,
    /// Record the minimum eigenvalue of every sampled state.
    pub check_positivity: bool,
    pub split_dt_ns: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let e = EvolveOptions::default();
        Self {
            dims: None,
            auto_truncate: false,
            certify_tol: 1e-3,
            certify_step: 2,
            max_dim: 20_000,
            rtol: e.rtol,
            atol: e.atol,
            steady_tol: None,
            check_positivity: false,
            split_dt_ns: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            rtol: self.rtol,
            atol: self.atol,
            check_positivity: self.check_positivity,
            ..EvolveOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Validation("solver.rtol and solver.atol must be positive".into()));
        }
        if !(self.certify_tol > 0.0) || self.certify_step == 0 {
            return Err(Error::Validation(
                "solver.certify_tol must be positive and solver.certify_step at least 1".into(),
            ));
        }
        if !(self.split_dt_ns > 0.0) {
            return Err(Error::Validation("solver.split_dt_ns must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Contents of a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub system: SystemOverrides,
    pub solver: SolverConfig,
    pub experiment: Option<Experiment>,
    pub output: OutputConfig,
}

const UNIT_SUFFIXES: [&str; 8] = ["_ghz", "_mhz", "_hz", "_mk", "_k", "_rad", "_deg", "_ns"];

fn known_keys(section: &[&str]) -> &'static [&'static str] {
    match section {
        [] => &["preset", "system", "solver", "experiment", "output"],
        ["system"] => &["c", "h", "r", "ej_ghz", "phi_rad", "resonance_tol"],
        ["system", _] => &["omega_ghz", "kappa_ghz", "temperature_mk", "lambda"],
        ["solver"] => &[
            "dims",
            "auto_truncate",
            "certify_tol",
            "certify_step",
            "max_dim",
            "rtol",
            "atol",
            "steady_tol",
            "check_positivity",
            "split_dt_ns",
        ],
        _ => &[],
    }
}

fn stem(key: &str) -> Option<&str> {
    UNIT_SUFFIXES.iter().find_map(|s| key.strip_suffix(s))
}

/// Reports keys that carry a unit suffix different from the known field.
fn check_unit_suffixes(value: &serde_json::Value, path: &mut Vec<String>) -> Result<()> {
    let serde_json::Value::Object(map) = value else {
        return Ok(());
    };
    let section: Vec<&str> = path.iter().map(String::as_str).collect();
    let known = known_keys(&section);
    for (key, v) in map {
        if !known.is_empty() && !known.contains(&key.as_str()) {
            if let Some(s) = stem(key) {
                if let Some(expected) = known.iter().find(|k| stem(k) == Some(s)) {
                    let at = if path.is_empty() { String::new() } else { format!("{}.", path.join(".")) };
                    return Err(Error::Config(format!(
                        "unit suffix mismatch: `{at}{key}` should be `{at}{expected}`"
                    )));
                }
            }
        }
        if v.is_object() && path.len() < 2 {
            path.push(key.clone());
            check_unit_suffixes(v, path)?;
            path.pop();
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let value: toml::Value = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        let json = serde_json::to_value(&value).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_value(json)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_value(json)
    }

    fn from_value(json: serde_json::Value) -> Result<Self> {
        check_unit_suffixes(&json, &mut Vec::new())?;
        serde_json::from_value(json).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }
}

/// Fully resolved run description, embedded in every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRun {
    pub preset: Option<String>,
    pub params: SystemParams,
    pub solver: SolverConfig,
    pub experiment: Experiment,
    pub output: OutputConfig,
    /// Truncation actually used, after any certification.
    pub certified_dims: Option<[usize; 3]>,
}

impl RunConfig {
    /// Preset (default `table1`) plus system and solver overrides.
    pub fn resolve(&self, default_preset: &str) -> Result<ResolvedRun> {
        self.solver.validate()?;
        let name = self.preset.as_deref().unwrap_or(default_preset);
        let preset = presets::by_name(name)?;
        let mut params = preset.params.clone();
        self.system.apply(&mut params);
        if let Some(d) = self.solver.dims {
            params.dims = d;
        }
        params.validate()?;
        Ok(ResolvedRun {
            preset: Some(name.to_string()),
            params,
            solver: self.solver.clone(),
            experiment: self.experiment.clone().unwrap_or(preset.experiment),
            output: self.output.clone(),
            certified_dims: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides() {
        let cfg = RunConfig::from_toml_str(
            r#"
            preset = "table1"
            [system]
            ej_ghz = 0.1
            [system.h]
            temperature_mk = 500.0
            [solver]
            dims = [6, 20, 6]
            "#,
        )
        .unwrap();
        let run = cfg.resolve("table1").unwrap();
        assert_eq!(run.params.ej_ghz, 0.1);
        assert_eq!(run.params.h.temperature_mk, 500.0);
        assert_eq!(run.params.dims, [6, 20, 6]);
        assert_eq!(run.experiment, Experiment::Steady);
    }

    #[test]
    fn json_mirror() {
        let cfg = RunConfig::from_json_str(r#"{"preset": "fig3", "solver": {"rtol": 1e-7}}"#).unwrap();
        assert_eq!(cfg.solver.rtol, 1e-7);
        assert_eq!(cfg.resolve("table1").unwrap().experiment, Experiment::Transient);
    }

    #[test]
    fn strict_keys() {
        let e = RunConfig::from_toml_str("[system]\nej = 0.1\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)), "{e}");
        let e = RunConfig::from_toml_str("[system.c]\ntemperature_k = 0.05\n").unwrap_err();
        assert!(e.to_string().contains("system.c.temperature_mk"), "{e}");
        let e = RunConfig::from_toml_str("[system]\nej_mhz = 200\n").unwrap_err();
        assert!(e.to_string().contains("ej_ghz"), "{e}");
        assert!(RunConfig::from_toml_str("[solver]\nsplit_dt_ms = 1\n").is_err());
        assert!(RunConfig::from_toml_str("bogus = 1\n").is_err());
    }

    #[test]
    fn experiment_block() {
        let cfg = RunConfig::from_toml_str(
            r#"
            [experiment]
            kind = "schedule"
            [experiment.schedule]
            sample_ns = 0.5
            segments = [{ phi_rad = 1.5707963267948966, duration_ns = 10.0 }, { phi_rad = 0.0, duration_ns = 5.0 }]
            "#,
        )
        .unwrap();
        let Some(Experiment::Schedule { schedule }) = cfg.experiment else { panic!() };
        assert_eq!(schedule.segments.len(), 2);
        assert_eq!(schedule.duration_ns(), 15.0);
    }

    #[test]
    fn validation_errors() {
        let cfg = RunConfig::from_toml_str("[system]\nej_ghz = -1.0\n").unwrap();
        assert!(cfg.resolve("table1").unwrap_err().is_validation());
        let cfg = RunConfig::from_toml_str("preset = \"nope\"\n").unwrap();
        assert!(cfg.resolve("table1").unwrap_err().is_validation());
    }
}
