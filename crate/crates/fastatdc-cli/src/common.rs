//! Shared CLI plumbing: error-to-exit-code mapping, flag parsing, output
//! handling, and config assembly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use fastatdc::pipeline::{PipelineError, RunIoError};
use fastatdc::scoring::ConfigError;
use fastatdc::trajdata::{DatasetPreset, GenError, IoError};
use fastatdc::{DetectionConfig64, Theta64};

use crate::{Probs, ScoringArgs};

/// Exit codes: 2 usage/config, 3 data, 4 algorithm.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Algorithm(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Algorithm(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(err: GenError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(err: IoError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<RunIoError> for CliError {
    fn from(err: RunIoError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(err: PipelineError) -> Self {
        match err {
            PipelineError::DatasetTooSmall { .. } => CliError::Data(err.to_string()),
            PipelineError::EmptyAnt { .. } | PipelineError::BadSampleCount { .. } => {
                CliError::Algorithm(err.to_string())
            }
        }
    }
}

/// Global flags threaded into every command.
pub struct Ctx {
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub csv: bool,
}

impl Ctx {
    /// Open the output sink: the `--output` file or stdout.
    pub fn writer(&self) -> Result<Box<dyn Write>, CliError> {
        match &self.output {
            Some(path) => {
                let file = File::create(path).map_err(|e| {
                    CliError::Data(format!("cannot write {}: {e}", path.display()))
                })?;
                Ok(Box::new(BufWriter::new(file)))
            }
            None => Ok(Box::new(BufWriter::new(std::io::stdout()))),
        }
    }
}

/// Load a dataset with the path in any error message.
pub fn load(path: &Path) -> Result<fastatdc::trajdata::Dataset, CliError> {
    fastatdc::trajdata::load_dataset(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn parse_preset(s: &str) -> Result<DatasetPreset, String> {
    DatasetPreset::from_name(s).ok_or_else(|| format!("unknown preset {s:?}; expected t1..t6"))
}

pub fn parse_theta(s: &str) -> Result<Theta64, String> {
    let values = parse_f64_list(s)?;
    let four: [f64; 4] = values
        .try_into()
        .map_err(|v: Vec<f64>| format!("theta needs 4 values, got {}", v.len()))?;
    Theta64::new(four).map_err(|e| e.to_string())
}

pub fn parse_probs(s: &str) -> Result<Probs, String> {
    let values = parse_f64_list(s)?;
    let five: [f64; 5] = values
        .try_into()
        .map_err(|v: Vec<f64>| format!("probs needs 5 values (GD,LD,NT,LS,GS), got {}", v.len()))?;
    Ok(Probs(five))
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {part:?}: {e}"))
        })
        .collect()
}

pub fn parse_u64_list(s: &str) -> Result<Vec<u64>, String> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad seed {part:?}: {e}"))
        })
        .collect()
}

impl ScoringArgs {
    /// Resolve thresholds: explicit --theta, then --theta-preset, then the
    /// standard defaults.
    pub fn theta(&self) -> Theta64 {
        if let Some(theta) = self.theta {
            theta
        } else if let Some(preset) = self.theta_preset {
            Theta64::tuned_for(preset)
        } else {
            Theta64::standard()
        }
    }

    pub fn config(&self, r1: f64, r2: f64, seed: u64) -> Result<DetectionConfig64, CliError> {
        Ok(DetectionConfig64::new(
            self.k,
            self.phi,
            self.theta(),
            r1,
            r2,
            seed,
        )?)
    }
}

/// Dataset display name for CSV rows: the embedded name, else the file stem.
pub fn dataset_label(name: &str, path: &Path) -> String {
    if name.is_empty() {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string())
    } else {
        name.to_string()
    }
}

pub fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN timing"));
    values[values.len() / 2]
}
