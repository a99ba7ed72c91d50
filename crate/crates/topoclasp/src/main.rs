use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topoclasp::checkpoint;
use topoclasp::config::{resolve, Overrides, DATA_ENV};
use topoclasp::experiment::{load_dataset, prepare, run_ablation, run_experiment, run_filtration_study};
use topoclasp::features::{diagram_dump, write_features_csv};
use topoclasp::gradcheck::run_gradcheck;
use topoclasp::report::{summary_table, write_json, SummaryRow};
use topoclasp::{AppError, Result};

/// Topology-aware contrastive graph classification.
///
/// Exit codes: 0 success, 1 I/O or internal error, 2 input parse error,
/// 3 config error, 4 training aborted, 5 gradient check failed.
#[derive(Parser)]
#[command(name = "topoclasp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Write topological feature vectors (CSV) and persistence diagrams.
    Features,
    /// Cross-validated training of one mode.
    Train {
        /// Also write each fold's final parameters as binary checkpoints.
        #[arg(long)]
        save_params: bool,
    },
    /// Topo, GIN, Topo-GIN and GraphTCL on the same folds.
    Ablate,
    /// The configured mode under hks, degree and closeness filtrations.
    FiltrationStudy,
    /// Finite-difference check of the full model's gradients.
    Gradcheck,
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn run(cli: Cli) -> Result<()> {
    let env_data = std::env::var(DATA_ENV).ok();
    let out = cli.opts.out.clone();
    match cli.command {
        Command::Gradcheck => {
            let seed = cli.opts.seed.unwrap_or(0);
            let summary = run_gradcheck(seed);
            println!("{:<12} {:>12}", "group", "max_rel_err");
            for (name, err) in &summary.per_group {
                println!("{name:<12} {err:>12.3e}");
            }
            println!("max_rel_err {:.3e} tolerance {:.0e}", summary.max_rel_err, summary.tolerance);
            if let Some(f) = &summary.failure {
                println!("failure {f}");
            }
            if summary.passed {
                println!("PASS");
                Ok(())
            } else {
                println!("FAIL");
                Err(AppError::GradCheck(format!("max relative error {:.3e}", summary.max_rel_err)))
            }
        }
        Command::Features => {
            let cfg = resolve(&cli.opts, env_data)?;
            let data = prepare(&cfg, load_dataset(&cfg)?)?;
            create_out(&out)?;
            let stem = format!("{}_{}", cfg.dataset, cfg.filtration);
            let csv_path = out.join(format!("{stem}_features.csv"));
            let topo_cfg = cfg.topo_config();
            write_features_csv(&data.dataset, &topo_cfg, &data.topo, &csv_path)?;
            let dump_path = out.join(format!("{stem}_diagrams.txt"));
            fs::write(&dump_path, diagram_dump(&data.dataset, &topo_cfg)?).map_err(|e| AppError::io(&dump_path, e))?;
            println!("graphs {} columns {}", data.topo.len(), topo_cfg.layout().len() + 2);
            println!("features {}", csv_path.display());
            println!("diagrams {}", dump_path.display());
            Ok(())
        }
        Command::Train { save_params } => {
            let cfg = resolve(&cli.opts, env_data)?;
            let run = run_experiment(&cfg)?;
            create_out(&out)?;
            run.report.write(&out, "report")?;
            if save_params {
                for o in &run.outcomes {
                    checkpoint::save_binary(&o.params.set, &out.join(format!("fold_{}.tclp", o.fold)))?;
                }
            }
            println!("{:<6} {:>9} {:>12}", "fold", "accuracy", "final_loss");
            for f in &run.report.folds {
                println!("{:<6} {:>9.4} {:>12.6}", f.fold, f.accuracy, f.losses.last().copied().unwrap_or(f64::NAN));
            }
            let row = SummaryRow { name: cfg.mode.display_name().into(), mean: run.report.mean, std: run.report.std };
            print!("{}", summary_table(&[row]));
            finish(&run.report)
        }
        Command::Ablate => {
            let cfg = resolve(&cli.opts, env_data)?;
            let report = run_ablation(&cfg)?;
            create_out(&out)?;
            write_json(&out.join("ablation.json"), &report)?;
            for r in &report.reports {
                r.write(&out, &format!("report_{}", r.config.mode))?;
            }
            print!("{}", summary_table(&report.rows));
            report.reports.iter().try_for_each(finish)
        }
        Command::FiltrationStudy => {
            let cfg = resolve(&cli.opts, env_data)?;
            let report = run_filtration_study(&cfg)?;
            create_out(&out)?;
            write_json(&out.join("filtration_study.json"), &report)?;
            println!("{:<12} {:>8} {:>8} {:>13}", "filtration", "mean_pct", "std_pct", "relative_drop");
            for e in &report.entries {
                println!("{:<12} {:>8.2} {:>8.2} {:>13.4}", e.filtration, 100.0 * e.mean, 100.0 * e.std, e.relative_drop);
            }
            report.reports.iter().try_for_each(finish)
        }
    }
}

fn finish(report: &topoclasp::report::ExperimentReport) -> Result<()> {
    match report.failures.iter().find(|f| f.aborted) {
        Some(f) => Err(AppError::TrainingAborted(format!("fold {}: {}", f.fold, f.error))),
        None if report.partial => Err(AppError::Internal(format!("{} folds failed", report.failures.len()))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
