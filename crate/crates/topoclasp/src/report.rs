//! Machine-readable experiment reports (JSON with a CSV mirror).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use topoclasp_core::train::{mean_std, ExperimentConfig};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub accuracy: f64,
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldFailure {
    pub fold: usize,
    pub error: String,
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub folds: Vec<FoldRecord>,
    pub mean: f64,
    pub std: f64,
    pub runtime_s: f64,
    /// True when some fold failed; `mean`/`std` then cover the finished folds.
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<FoldFailure>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, folds: Vec<FoldRecord>, failures: Vec<FoldFailure>, runtime_s: f64) -> Self {
        let accs: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
        let (mean, std) = mean_std(&accs);
        Self { config, folds, mean, std, runtime_s, partial: !failures.is_empty(), failures }
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    /// The report with wall time zeroed, for reproducibility comparisons.
    pub fn without_runtime(&self) -> Self {
        Self { runtime_s: 0.0, ..self.clone() }
    }

    pub fn aborted(&self) -> bool {
        self.failures.iter().any(|f| f.aborted)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        write_json(&dir.join(format!("{stem}.json")), self)?;
        let path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| AppError::Internal(format!("{}: {e}", path.display())))?;
        let err = |e: csv::Error| AppError::Internal(e.to_string());
        w.write_record(["fold", "accuracy", "epochs", "final_loss"]).map_err(err)?;
        for f in &self.folds {
            let last = f.losses.last().copied().unwrap_or(f64::NAN);
            w.write_record([f.fold.to_string(), f.accuracy.to_string(), f.losses.len().to_string(), last.to_string()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| AppError::io(&path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

/// Four rows in table order: Topo, GIN, Topo-GIN, GraphTCL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<SummaryRow>,
    pub reports: Vec<ExperimentReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiltrationEntry {
    pub filtration: String,
    pub mean: f64,
    pub std: f64,
    /// `(mean_hks − mean) / mean_hks`.
    pub relative_drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiltrationStudyReport {
    pub dataset: String,
    pub entries: Vec<FiltrationEntry>,
    pub reports: Vec<ExperimentReport>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| AppError::Internal(e.to_string()))?;
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

/// Whitespace-separated table: `name mean_pct std_pct`, fixed column order.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut out = format!("{:<12} {:>8} {:>8}\n", "name", "mean_pct", "std_pct");
    for r in rows {
        out.push_str(&format!("{:<12} {:>8.2} {:>8.2}\n", r.name, 100.0 * r.mean, 100.0 * r.std));
    }
    out
}
