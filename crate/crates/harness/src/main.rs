use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use ucsolve_harness::bench::{read_rows, run_suite, RUNS_FILE};
use ucsolve_harness::report::{aggregate, render_tables};
use ucsolve_harness::solve::{exit_code, load_instance, render_solution, render_stage_times, solve};
use ucsolve_harness::suite::{default_suite, load_suite, Engine, EngineSettings};

#[derive(Parser)]
#[command(name = "ucbench", version, about = "Unit-commitment MILP benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the built-in 57-scenario suite as JSON.
    DefaultSuite {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
    },
    /// Materialize a suite's instances as MPS and JSON files.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance (MPS, or JSON by extension) with one engine.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "pdhg")]
        engine: EngineArg,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long = "mip-gap", default_value_t = 1e-6)]
        mip_gap: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "log-period", default_value_t = 100)]
        log_period: usize,
        #[arg(long = "node-limit")]
        node_limit: Option<usize>,
        #[arg(long = "time-limit")]
        time_limit: Option<f64>,
    },
    /// Run a suite with both engines, resuming from an existing out dir.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Aggregate runs.csv and print the tables.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EngineArg {
    Pdhg,
    Simplex,
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::DefaultSuite { out, repetitions } => {
            let suite = default_suite(repetitions);
            std::fs::write(&out, serde_json::to_string_pretty(&suite)?)?;
            eprintln!("wrote {} scenarios to {}", suite.len(), out.display());
            Ok(0)
        }
        Command::Generate { config, out } => {
            let suite = load_suite(&config)?;
            ucsolve_harness::generate(&suite, &out)?;
            eprintln!("wrote {} instances to {}", suite.len(), out.display());
            Ok(0)
        }
        Command::Solve {
            instance,
            engine,
            eps,
            mip_gap,
            seed,
            log_period,
            node_limit,
            time_limit,
        } => {
            let engine = match engine {
                EngineArg::Pdhg => Engine::Pdhg,
                EngineArg::Simplex => Engine::Simplex,
            };
            let defaults = EngineSettings::default();
            let settings = EngineSettings {
                node_limit: node_limit.unwrap_or(defaults.node_limit),
                rel_mip_gap: mip_gap,
                time_limit_seconds: time_limit,
                seed,
                eps_rel: eps,
                ..defaults
            };
            let mut params = settings.params(engine);
            params.pdhg.log_period = log_period;
            let problem = load_instance(&instance)?;
            let sol = solve(&problem, &params)?;
            print!("{}", render_solution(&problem, &sol));
            eprint!("{}", render_stage_times(&sol));
            Ok(exit_code(sol.status) as u8)
        }
        Command::Bench { suite, out, workers } => {
            let scenarios = load_suite(&suite)?;
            let outcome = run_suite(&scenarios, &out, workers)?;
            print!("{}", render_tables(&outcome.report));
            eprintln!(
                "{} solves performed, {} failed runs",
                outcome.solves, outcome.failures
            );
            Ok(if outcome.failures == 0 { 0 } else { 1 })
        }
        Command::Report { dir } => {
            let rows = read_rows(&dir.join(RUNS_FILE))?;
            print!("{}", render_tables(&aggregate(&rows)?));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
