//! Configuration-driven runs: each command reads a scenario, writes its
//! artifacts to the output directory and ends with a `verdicts.json`.

mod checks;
mod commands;
mod config;
mod perturbation;

pub use commands::{cmd_dispersion, cmd_evolve, cmd_lap, cmd_stationary, cmd_verify, run_scenario, ScenarioRun};
pub use config::{
    Check, FamilyConfig, GridConfig, PerturbationSpec, RunConfig, ScenarioConfig, Schedule, Shape, VerifyConfig,
};
pub use perturbation::{build_perturbation, check_edge_buffer, edge_mass_fraction, EDGE_BUFFER, EDGE_MASS_LIMIT};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{LabError, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_EDGE_BUFFER: i32 = 4;

/// Exit code for a run that stopped with `err`.
pub fn exit_code_for(err: &LabError) -> i32 {
    match err {
        LabError::Config(_) | LabError::Json(_) => EXIT_CONFIG,
        LabError::EdgeBuffer { .. } => EXIT_EDGE_BUFFER,
        _ => EXIT_SOLVER,
    }
}

/// Outcome of one check, with the measured value and the limit it was held to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn new(check: impl Into<String>, passed: bool, value: f64, limit: f64) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            check: check.into(),
            passed,
            value: finite(value),
            limit: finite(limit),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// What a command produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunArtifact {
    pub command: String,
    pub config: Option<ScenarioConfig>,
    pub output_dir: PathBuf,
    pub family_file: Option<PathBuf>,
    pub diagnostics_csv: Option<PathBuf>,
    pub snapshots_dir: Option<PathBuf>,
    pub summary: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub exit_code: i32,
}

impl RunArtifact {
    pub(crate) fn new(command: &str, config: &ScenarioConfig) -> Self {
        Self {
            command: command.to_string(),
            config: Some(config.clone()),
            output_dir: config.output.clone(),
            family_file: None,
            diagnostics_csv: None,
            snapshots_dir: None,
            summary: BTreeMap::new(),
            verdicts: Vec::new(),
            exit_code: EXIT_PASS,
        }
    }

    /// Artifact of a run that stopped with an error before producing verdicts.
    pub fn failed(command: &str, config: Option<&ScenarioConfig>, output_dir: &Path, err: &LabError) -> Self {
        Self {
            command: command.to_string(),
            config: config.cloned(),
            output_dir: output_dir.to_path_buf(),
            family_file: None,
            diagnostics_csv: None,
            snapshots_dir: None,
            summary: BTreeMap::new(),
            verdicts: vec![Verdict::new("run", false, f64::NAN, f64::NAN).with_note(err.to_string())],
            exit_code: exit_code_for(err),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }

    pub(crate) fn finish(mut self) -> Result<Self> {
        if self.verdicts.is_empty() {
            self.verdicts
                .push(Verdict::new("run", true, f64::NAN, f64::NAN).with_note("no checks enabled"));
        }
        self.exit_code = if self.passed() { EXIT_PASS } else { EXIT_CHECK_FAILED };
        self.write()?;
        Ok(self)
    }

    /// Write `verdicts.json` into the output directory.
    pub fn write(&self) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.output_dir).map_err(|e| LabError::io(&self.output_dir, e))?;
        let path = self.output_dir.join("verdicts.json");
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").map_err(|e| LabError::io(&path, e))?;
        Ok(path)
    }
}
