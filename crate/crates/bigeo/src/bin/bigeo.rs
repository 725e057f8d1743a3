//! Experiment CLI: seeded synthetic studies and the knee pipeline, emitting
//! plot-ready CSV/JSON.
//!
//! Exit codes: 0 success, 1 runtime/data failure, 2 usage error.

use bigeo::experiments::{
    equivariance_study_with, r2_histogram_with, study_solver, Connection, Estimator, SynthConfig,
};
use bigeo::knee::{generate_fixture, knee_regression, load_records};
use bigeo::regression::SolverConfig;
use bigeo::Side;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bigeo",
    about = "Bi-invariant geodesic regression experiments on SE(3)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Biinvariant,
    Riemannian,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Estimator {
        match e {
            EstimatorArg::Biinvariant => Estimator::Biinvariant,
            EstimatorArg::Riemannian => Estimator::Riemannian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
    Both,
}

#[derive(Args)]
struct SolverArgs {
    /// Fixed-point / descent stepsize.
    #[arg(long)]
    lambda: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Convergence threshold on the update-vector auxiliary norm.
    #[arg(long)]
    tol: Option<f64>,
}

impl SolverArgs {
    fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Equivariance study: deviation between translated fits and fits of
    /// translated data (CSV: index, side, estimator, deviation, converged).
    SynthEquivariance {
        /// RNG seed.
        #[arg(long, env = "BIGEO_SEED", default_value_t = 0)]
        seed: u64,
        /// Number of random translations.
        #[arg(long, default_value_t = 20)]
        translations: usize,
        /// Variance of the random translation draws.
        #[arg(long, default_value_t = 1.0)]
        translation_variance: f64,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Biinvariant)]
        estimator: EstimatorArg,
        /// Which translation side(s) to report.
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// R^2 distribution of the Riemannian fit under random right translation
    /// (CSV of R^2 values plus a summary JSON).
    R2Hist {
        #[arg(long, env = "BIGEO_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        translations: usize,
        #[arg(long, default_value_t = 100.0)]
        translation_variance: f64,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output CSV path; the summary JSON is written next to it with a
        /// `.summary.json` suffix (both to stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Knee pipeline: PCA frames from vertex clouds, relative motions,
    /// bi-invariant regression against KL grade (CSV: grade, t,
    /// translational_norm; fit JSON alongside).
    Knee {
        /// JSON manifest: array of {subject_id, kl_grade, femur_path, tibia_path}.
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output CSV path; fit details go to `<out>.fit.json` (stdout when
        /// omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the synthetic knee fixture (vertex clouds + manifest) with
    /// implanted joint-space narrowing.
    GenKneeFixture {
        #[arg(long, env = "BIGEO_SEED", default_value_t = 0)]
        seed: u64,
        /// Target directory.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        subjects_per_grade: usize,
    },
}

/// 17-significant-digit float formatting: round-trip exact, locale-free.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(out: &Option<PathBuf>, contents: &str) -> bigeo::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, contents).map_err(|e| {
                bigeo::Error::Io(format!("{}: {e}", path.display()))
            })?;
        }
        None => print!("{contents}"),
    }
    Ok(())
}

fn run(cli: Cli) -> bigeo::Result<()> {
    match cli.command {
        Command::SynthEquivariance {
            seed,
            translations,
            translation_variance,
            estimator,
            side,
            solver,
            out,
        } => {
            let estimator: Estimator = estimator.into();
            let connection = match estimator {
                Estimator::Biinvariant => Connection::Ccs,
                Estimator::Riemannian => Connection::LeviCivita,
            };
            let cfg = SynthConfig::new(seed, connection);
            let solver_cfg = solver.apply(study_solver(estimator));
            let rows = equivariance_study_with(
                &cfg,
                translations,
                translation_variance,
                estimator,
                &solver_cfg,
            )?;
            let mut csv = String::from("index,side,estimator,deviation,converged\n");
            for row in rows {
                let keep = matches!(
                    (side, row.side),
                    (SideArg::Both, _) | (SideArg::Left, Side::Left) | (SideArg::Right, Side::Right)
                );
                if keep {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        row.index,
                        row.side,
                        row.estimator,
                        fmt(row.deviation),
                        row.converged
                    ));
                }
            }
            emit(&out, &csv)
        }
        Command::R2Hist {
            seed,
            translations,
            translation_variance,
            solver,
            out,
        } => {
            let cfg = SynthConfig::new(seed, Connection::LeviCivita);
            let solver_cfg = solver.apply(study_solver(Estimator::Riemannian));
            let hist = r2_histogram_with(&cfg, translations, translation_variance, &solver_cfg)?;
            let mut csv = String::from("r_squared\n");
            for v in &hist.values {
                csv.push_str(&fmt(*v));
                csv.push('\n');
            }
            let summary = serde_json::json!({
                "untranslated": hist.untranslated,
                "min": hist.min(),
                "mean": hist.mean(),
                "dropped": hist.dropped,
            });
            let summary = format!("{}\n", serde_json::to_string_pretty(&summary).unwrap());
            match &out {
                Some(path) => {
                    emit(&out, &csv)?;
                    let mut json_path = path.as_os_str().to_owned();
                    json_path.push(".summary.json");
                    emit(&Some(PathBuf::from(json_path)), &summary)
                }
                None => {
                    print!("{csv}");
                    print!("{summary}");
                    Ok(())
                }
            }
        }
        Command::Knee {
            manifest,
            solver,
            out,
        } => {
            let records = load_records(&manifest)?;
            let solver_cfg = solver.apply(SolverConfig::knee_preset());
            let table = knee_regression(&records, &solver_cfg)?;
            let mut csv = String::from("grade,t,translational_norm\n");
            for row in &table.rows {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    row.grade,
                    fmt(row.t),
                    fmt(row.translational_norm)
                ));
            }
            let fit_json = serde_json::json!({
                "iterations": table.fit.iterations,
                "final_update_norm": table.fit.final_update_norm,
                "converged": table.fit.converged,
            });
            let fit_json = format!("{}\n", serde_json::to_string_pretty(&fit_json).unwrap());
            match &out {
                Some(path) => {
                    emit(&out, &csv)?;
                    let mut json_path = path.as_os_str().to_owned();
                    json_path.push(".fit.json");
                    emit(&Some(PathBuf::from(json_path)), &fit_json)
                }
                None => {
                    print!("{csv}");
                    print!("{fit_json}");
                    Ok(())
                }
            }
        }
        Command::GenKneeFixture {
            seed,
            out_dir,
            subjects_per_grade,
        } => {
            let manifest = generate_fixture(&out_dir, seed, subjects_per_grade)?;
            println!("{}", manifest.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
