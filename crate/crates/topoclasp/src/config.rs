//! Resolution of the experiment config: defaults, then a JSON file with flat
//! keys, then command-line flags. `TOPOCLASP_DATA` fills in the dataset
//! directory when neither the file nor a flag sets it.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use topoclasp_core::train::ExperimentConfig;

use crate::error::{AppError, Result};

pub const DATA_ENV: &str = "TOPOCLASP_DATA";

/// Flags shared by every subcommand. Mode and filtration stay strings so a
/// bad name is reported as a config error rather than a usage error.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file (flat keys of the experiment config).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory holding TU datasets; falls back to $TOPOCLASP_DATA, then ./data.
    #[arg(long, global = true)]
    pub dataset_dir: Option<String>,
    /// Dataset name, e.g. MUTAG.
    #[arg(long, global = true)]
    pub dataset: Option<String>,
    /// topo, gnn, concat or tcl.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// hks, degree or closeness.
    #[arg(long, global = true)]
    pub filtration: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    /// Minibatch size.
    #[arg(long, global = true)]
    pub batch: Option<usize>,
    /// Weight of the contrastive term.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Contrastive temperature.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub hidden: Option<usize>,
    /// Number of heat-kernel time scales.
    #[arg(long, global = true)]
    pub scales: Option<usize>,
    /// Filtration thresholds per scale.
    #[arg(long, global = true)]
    pub thresholds: Option<usize>,
    /// Worker threads for features and folds.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory for reports and dumps.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

/// Reads a flat JSON config; unknown keys are rejected.
pub fn load_config_file(path: &Path) -> Result<(ExperimentConfig, bool)> {
    let text = fs::read_to_string(path).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
    let sets_dir = value.get("dataset_dir").is_some();
    let cfg = serde_json::from_value(value).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
    Ok((cfg, sets_dir))
}

pub fn resolve(o: &Overrides, env_data: Option<String>) -> Result<ExperimentConfig> {
    let (mut cfg, file_sets_dir) = match &o.config {
        Some(path) => load_config_file(path)?,
        None => (ExperimentConfig::default(), false),
    };
    if !file_sets_dir {
        if let Some(dir) = env_data.filter(|d| !d.is_empty()) {
            cfg.dataset_dir = dir;
        }
    }
    if let Some(v) = &o.dataset_dir {
        cfg.dataset_dir = v.clone();
    }
    if let Some(v) = &o.dataset {
        cfg.dataset = v.clone();
    }
    if let Some(v) = &o.mode {
        cfg.mode = v.parse()?;
    }
    if let Some(v) = &o.filtration {
        cfg.filtration = v.parse()?;
    }
    macro_rules! copy {
        ($($field:ident),*) => {$(
            if let Some(v) = o.$field {
                cfg.$field = v;
            }
        )*};
    }
    copy!(seed, epochs, batch, alpha, tau, hidden, scales, thresholds, jobs);
    cfg.validate()?;
    Ok(cfg)
}
