//! Cross-validated runs, the four-way ablation and the filtration study.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use topoclasp_core::graph::Dataset;
use topoclasp_core::model::Mode;
use topoclasp_core::train::{prepare_inputs, stratified_kfold, train_fold, ExperimentConfig, FoldOutcome};
use topoclasp_core::vectorize::FiltrationSource;
use topoclasp_core::Error as CoreError;

use crate::error::Result;
use crate::features::{compute_topo_vectors, pool};
use crate::report::{
    AblationReport, ExperimentReport, FiltrationEntry, FiltrationStudyReport, FoldFailure, FoldRecord, SummaryRow,
};
use crate::tu::parse_tu_dataset;

/// Model inputs plus the raw topological vectors of one filtration setting.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    pub topo: Vec<Vec<f64>>,
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let raw = parse_tu_dataset(Path::new(&cfg.dataset_dir), &cfg.dataset)?;
    Ok(prepare_inputs(&raw))
}

pub fn prepare(cfg: &ExperimentConfig, dataset: Dataset) -> Result<Prepared> {
    let topo = compute_topo_vectors(&dataset, &cfg.topo_config(), cfg.jobs)?;
    Ok(Prepared { dataset, topo })
}

pub struct ExperimentRun {
    pub report: ExperimentReport,
    /// Successful folds, in fold order.
    pub outcomes: Vec<FoldOutcome>,
}

/// Trains every fold (in parallel when `jobs > 1`); fold results do not
/// depend on scheduling since each fold seeds its own generator.
pub fn run_prepared(cfg: &ExperimentConfig, data: &Prepared) -> Result<ExperimentRun> {
    cfg.validate()?;
    let start = Instant::now();
    let splits = stratified_kfold(&data.dataset.labels(), cfg.folds, cfg.seed)?;
    let run = |(fold, split)| train_fold(cfg, &data.dataset, &data.topo, split, fold);
    let results: Vec<std::result::Result<FoldOutcome, CoreError>> = if cfg.jobs <= 1 {
        splits.iter().enumerate().map(run).collect()
    } else {
        pool(cfg.jobs)?.install(|| splits.par_iter().enumerate().map(run).collect())
    };
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (fold, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => outcomes.push(o),
            Err(e) => {
                log::error!("fold {fold}: {e}");
                let aborted = matches!(e, CoreError::TrainingAborted(_));
                failures.push(FoldFailure { fold, error: e.to_string(), aborted });
            }
        }
    }
    let folds = outcomes
        .iter()
        .map(|o| FoldRecord { fold: o.fold, accuracy: o.accuracy, losses: o.losses.clone() })
        .collect();
    let report = ExperimentReport::new(cfg.clone(), folds, failures, start.elapsed().as_secs_f64());
    Ok(ExperimentRun { report, outcomes })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let data = prepare(cfg, load_dataset(cfg)?)?;
    run_prepared(cfg, &data)
}

/// All four modes on shared inputs, in table order.
pub fn run_ablation(cfg: &ExperimentConfig) -> Result<AblationReport> {
    cfg.validate()?;
    let data = prepare(cfg, load_dataset(cfg)?)?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for mode in Mode::ALL {
        let cfg = ExperimentConfig { mode, ..cfg.clone() };
        let report = run_prepared(&cfg, &data)?.report;
        rows.push(SummaryRow { name: mode.display_name().to_string(), mean: report.mean, std: report.std });
        reports.push(report);
    }
    Ok(AblationReport { rows, reports })
}

/// The configured mode under every filtration source, same seeds.
pub fn run_filtration_study(cfg: &ExperimentConfig) -> Result<FiltrationStudyReport> {
    cfg.validate()?;
    let dataset = load_dataset(cfg)?;
    let mut reports = Vec::new();
    for source in FiltrationSource::ALL {
        let cfg = ExperimentConfig { filtration: source, ..cfg.clone() };
        let data = prepare(&cfg, dataset.clone())?;
        reports.push(run_prepared(&cfg, &data)?.report);
    }
    Ok(study_report(&cfg.dataset, reports))
}

/// Summarizes runs that differ only in filtration; the first is the reference.
pub fn study_report(dataset: &str, reports: Vec<ExperimentReport>) -> FiltrationStudyReport {
    let reference = reports.first().map_or(f64::NAN, |r| r.mean);
    let entries = reports
        .iter()
        .map(|r| FiltrationEntry {
            filtration: r.config.filtration.name().to_string(),
            mean: r.mean,
            std: r.std,
            relative_drop: (reference - r.mean) / reference,
        })
        .collect();
    FiltrationStudyReport { dataset: dataset.to_string(), entries, reports }
}
