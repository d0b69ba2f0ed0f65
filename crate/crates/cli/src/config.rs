//! Experiment-file schemas, loading, validation, and hashing.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hdtest::harness::{SimConfig, StatisticForm};
use hdtest::models::{ErrorDist, ModelId};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizeFile {
    pub schema_version: u32,
    pub runs: Vec<SimConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerRun {
    pub config: SimConfig,
    pub m_values: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerFile {
    pub schema_version: u32,
    pub runs: Vec<PowerRun>,
}

fn default_form() -> StatisticForm {
    StatisticForm::TheoryOracle
}

fn default_qf_reps() -> usize {
    2000
}

/// One diagnostic record. `independence` and `null_law` evaluate the
/// theory-oracle statistic forms by default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum DiagnoseRun {
    Independence {
        config: SimConfig,
        #[serde(default = "default_form")]
        form: StatisticForm,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<Vec<(f64, f64)>>,
    },
    NullLaw {
        config: SimConfig,
        #[serde(default = "default_form")]
        form: StatisticForm,
    },
    QfClt {
        model: ModelId,
        p: usize,
        #[serde(default)]
        model_seed: u64,
        error: ErrorDist,
        #[serde(default = "default_qf_reps")]
        reps: usize,
        seed: u64,
        /// Use the identity transform instead of the model's A matrix.
        #[serde(default)]
        identity: bool,
    },
    Conditions {
        model: ModelId,
        p: usize,
        #[serde(default)]
        model_seed: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnoseFile {
    pub schema_version: u32,
    pub runs: Vec<DiagnoseRun>,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_error(path: &Path, err: serde_json::Error) -> CliError {
    CliError::usage(format!(
        "config {}: line {}, column {}: {err}",
        path.display(),
        err.line(),
        err.column()
    ))
}

fn check_schema(version: u32) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(CliError::usage(format!(
            "schema_version: unsupported version {version}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

fn check_config(cfg: &SimConfig) -> Result<(), CliError> {
    cfg.validate()
        .map_err(|e| CliError::usage(format!("config validation failed: {e}")))
}

pub fn load_size_file(path: &Path) -> Result<SizeFile, CliError> {
    let text = read_file(path)?;
    let file: SizeFile = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    check_schema(file.schema_version)?;
    if file.runs.is_empty() {
        return Err(CliError::usage("runs: at least one run is required"));
    }
    for cfg in &file.runs {
        check_config(cfg)?;
    }
    Ok(file)
}

pub fn load_power_file(path: &Path) -> Result<PowerFile, CliError> {
    let text = read_file(path)?;
    let file: PowerFile = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    check_schema(file.schema_version)?;
    if file.runs.is_empty() {
        return Err(CliError::usage("runs: at least one run is required"));
    }
    for run in &file.runs {
        check_config(&run.config)?;
        if run.m_values.is_empty() {
            return Err(CliError::usage("m_values: must be nonempty"));
        }
    }
    Ok(file)
}

pub fn load_diagnose_file(path: &Path) -> Result<DiagnoseFile, CliError> {
    let text = read_file(path)?;
    let file: DiagnoseFile = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    check_schema(file.schema_version)?;
    if file.runs.is_empty() {
        return Err(CliError::usage("runs: at least one run is required"));
    }
    for run in &file.runs {
        match run {
            DiagnoseRun::Independence { config, .. } | DiagnoseRun::NullLaw { config, .. } => {
                check_config(config)?
            }
            DiagnoseRun::QfClt { p, reps, .. } => {
                if *p < 1 {
                    return Err(CliError::usage("p: must be >= 1"));
                }
                if *reps < 1 {
                    return Err(CliError::usage("reps: must be >= 1"));
                }
            }
            DiagnoseRun::Conditions { p, .. } => {
                if *p < 4 {
                    return Err(CliError::usage("p: must be >= 4"));
                }
            }
        }
    }
    Ok(file)
}

/// Hex-encoded SHA-256 prefix of the canonical JSON of a config payload.
pub fn config_hash<T: Serialize>(payload: &T) -> String {
    let canonical = serde_json::to_string(payload).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
