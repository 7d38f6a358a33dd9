//! Run configuration files (TOML).
//!
//! ```toml
//! schema_version = 1
//!
//! [valve]
//! bath_size = 600
//! gamma = 0.4
//! bath1_temperature = 1.0
//! bath2_temperature = 0.0
//! coupling_dist = "uniform_symmetric"
//! seed = 7
//!
//! [valve.internal_coupling]
//! kind = "random_hermitian"
//! scale = 0.5
//!
//! [sweep]
//! gamma_grid = [0.05, 0.1, 0.2, 0.4]
//! realizations = 5
//!
//! [trace]
//! t_max = 50.0
//! dt = 0.05
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qheat_core::evolution::{time_grid, MIN_WINDOW_SAMPLES};
use qheat_core::harness::CouplingMoment;
use qheat_core::model::ValveConfig;

use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub valve: ValveConfig,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub trace: TraceSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub gamma_grid: Vec<f64>,
    pub realizations: usize,
    pub window: [f64; 2],
    pub dt: f64,
    /// Bath size and realization count used with `--full`.
    pub full_bath_size: usize,
    pub full_realizations: usize,
    /// Bath size for `--compare-distributions --full`.
    pub full_compare_bath_size: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            gamma_grid: vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0],
            realizations: 5,
            window: [20.0, 50.0],
            dt: 0.1,
            full_bath_size: 1200,
            full_realizations: 10,
            full_compare_bath_size: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceSection {
    pub t_max: f64,
    pub dt: f64,
    /// Bath sizes to trace; empty means `valve.bath_size` only.
    pub bath_sizes: Vec<usize>,
    pub full_bath_sizes: Vec<usize>,
    pub pert_moment: CouplingMoment,
}

impl Default for TraceSection {
    fn default() -> Self {
        Self {
            t_max: 50.0,
            dt: 0.05,
            bath_sizes: Vec::new(),
            full_bath_sizes: vec![300, 600, 1200],
            pert_moment: CouplingMoment::Ensemble,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|f| match f {
            Failure::Usage(msg) => Failure::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let raw: toml::Value = toml::from_str(text).map_err(|e| Failure::Usage(e.to_string()))?;
        match raw.get("schema_version").and_then(toml::Value::as_integer) {
            Some(v) if v == SCHEMA_VERSION as i64 => {}
            Some(v) => {
                return Err(Failure::Usage(format!(
                    "schema_version: unsupported version {v} (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(Failure::Usage("schema_version: missing or not an integer".into())),
        }
        let config: RunConfig = toml::from_str(text).map_err(|e| Failure::Usage(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.valve.validate()?;
        let bad = |key: &str, reason: &str| Err(Failure::Usage(format!("invalid `{key}`: {reason}")));
        let s = &self.sweep;
        if s.gamma_grid.is_empty() {
            return bad("sweep.gamma_grid", "must not be empty");
        }
        if s.gamma_grid.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return bad("sweep.gamma_grid", "entries must be finite and >= 0");
        }
        if s.realizations == 0 || s.full_realizations == 0 {
            return bad("sweep.realizations", "must be at least 1");
        }
        if !(s.window[0] >= 0.0 && s.window[1] > s.window[0]) {
            return bad("sweep.window", "need 0 <= start < end");
        }
        if !(s.dt > 0.0) {
            return bad("sweep.dt", "must be positive");
        }
        let samples = time_grid(s.window[0], s.window[1], s.dt).len();
        if samples < MIN_WINDOW_SAMPLES {
            return bad(
                "sweep.window",
                &format!("holds {samples} samples at dt = {}, need {MIN_WINDOW_SAMPLES}", s.dt),
            );
        }
        let t = &self.trace;
        if !(t.t_max > 0.0 && t.t_max.is_finite()) {
            return bad("trace.t_max", "must be positive");
        }
        if !(t.dt > 0.0 && t.dt <= t.t_max) {
            return bad("trace.dt", "must be positive and at most t_max");
        }
        if t.bath_sizes.contains(&0) || t.full_bath_sizes.contains(&0) {
            return bad("trace.bath_sizes", "sizes must be at least 1");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}
