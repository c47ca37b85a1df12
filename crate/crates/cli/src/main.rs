use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use dbarlab::plot::emit_plot_script;
use dbarlab::report::write_report;
use dbarlab::{run, Experiment, ExperimentConfig, Overrides, UsageError};

#[derive(Parser)]
#[command(name = "dbarlab", version, about = "Discrete dbar-Neumann experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config; missing tables take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    #[arg(long, global = true)]
    solver_tol: Option<f64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Witness certificates and quotients R_j.
    DiscExample,
    /// lambda_h over shrinking neighbourhoods.
    ShrinkStudy,
    /// The weighted inequality on seeded forms.
    MkhSuite,
    /// Compactness probe over the witness family.
    Probe,
    /// Analytic anchors of the eigenvalue solver and the quadrature.
    Anchors,
    /// Writes a plot script for a CSV produced by a run.
    Plot { csv: PathBuf },
}

fn execute(cli: Cli) -> Result<bool> {
    let exp = match cli.command {
        Command::DiscExample => Experiment::DiscExample,
        Command::ShrinkStudy => Experiment::ShrinkStudy,
        Command::MkhSuite => Experiment::MkhSuite,
        Command::Probe => Experiment::Probe,
        Command::Anchors => Experiment::Anchors,
        Command::Plot { csv } => {
            let script = emit_plot_script(&csv).map_err(|e| UsageError(format!("{e:#}")))?;
            println!("{}", script.display());
            return Ok(true);
        }
    };
    let overrides = Overrides {
        out: cli.out,
        seed: cli.seed,
        quad_tol: cli.quad_tol,
        solver_tol: cli.solver_tol,
        threads: cli.threads,
    };
    let cfg = ExperimentConfig::load(cli.config.as_deref())?.apply(&overrides);
    cfg.validate(exp)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.threads)
        .build_global()
        .map_err(|e| UsageError(format!("thread pool: {e}")))?;
    let report = run(&cfg, exp)?;
    let (csv, json) = write_report(&cfg.run.out, &report)?;
    let script = emit_plot_script(&csv)?;
    for r in &report.rows {
        println!(
            "{} {} {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.neighborhood,
            r.lambda.or(r.r_quotient).map(|v| format!("{v:.6}")).unwrap_or_default()
        );
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {} {} {}", csv.display(), json.display(), script.display());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
