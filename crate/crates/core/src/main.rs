use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tempered_nqs::hamiltonian::Boundary;
use tempered_nqs::harness::{
    emit_plot_data, experiment_dir, read_experiment, run_experiment, sweep, write_experiment, write_plot_data,
    ExperimentConfig, ExperimentSummary,
};
use tempered_nqs::oracle::{j1j2_spectrum, precipice_spectrum};
use tempered_nqs::Result;

#[derive(Parser)]
#[command(name = "tempered-nqs", version, about = "Tempered stochastic-reconfiguration training of neural quantum states")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ensemble described by a config file.
    Run(ExperimentArgs),
    /// Run the config once per value of its sweep axis.
    Sweep(ExperimentArgs),
    /// Print exact reference energies as JSON.
    Oracle {
        #[command(subcommand)]
        problem: OracleProblem,
    },
    /// Regenerate plot series from a finished run directory.
    Plotdata {
        /// Directory holding `events.jsonl`, `summary.csv` and `config.toml`.
        #[arg(long)]
        run_dir: PathBuf,
        /// Where to write the CSVs (defaults to `<run_dir>/plot`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory; results go to `<out_dir>/runs/<name>`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Overrides the number of runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Overrides the number of updates per run.
    #[arg(long)]
    updates: Option<usize>,
}

#[derive(Subcommand)]
enum OracleProblem {
    Precipice {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.8)]
        s: f64,
        #[arg(long, default_value_t = 2)]
        levels: usize,
    },
    J1j2 {
        #[arg(long)]
        lx: usize,
        #[arg(long)]
        ly: usize,
        #[arg(long, default_value_t = 1.0)]
        j1: f64,
        #[arg(long)]
        j2: f64,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
        boundary: BoundaryArg,
        /// Number of up spins (defaults to half filling).
        #[arg(long)]
        weight: Option<usize>,
        #[arg(long, default_value_t = 2)]
        levels: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Open,
    Periodic,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Open => Boundary::Open,
            BoundaryArg::Periodic => Boundary::Periodic,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let (config, base) = load_config(&args)?;
            let result = run_experiment(&config)?;
            let dir = experiment_dir(&base, &config.name);
            write_experiment(&config, &result, &dir)?;
            report(&result.summary, &dir)
        }
        Command::Sweep(args) => {
            let (config, base) = load_config(&args)?;
            let mut summaries = Vec::new();
            for (point, result) in sweep(&config)? {
                let dir = experiment_dir(&base, &point.name);
                write_experiment(&point, &result, &dir)?;
                report(&result.summary, &dir)?;
                summaries.push(result.summary);
            }
            let path = experiment_dir(&base, &config.name).with_extension("sweep.json");
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, serde_json::to_string_pretty(&summaries)?)?;
            eprintln!("sweep summary: {}", path.display());
            Ok(())
        }
        Command::Oracle { problem } => {
            let spectrum = match problem {
                OracleProblem::Precipice { n, s, levels } => precipice_spectrum(n, s, levels)?,
                OracleProblem::J1j2 { lx, ly, j1, j2, boundary, weight, levels } => {
                    j1j2_spectrum(lx, ly, j1, j2, boundary.into(), weight.unwrap_or(lx * ly / 2), levels)?
                }
            };
            print_json(&spectrum)
        }
        Command::Plotdata { run_dir, out_dir } => {
            let (config, records) = read_experiment(&run_dir)?;
            let out = out_dir.unwrap_or_else(|| run_dir.join("plot"));
            write_plot_data(&emit_plot_data(&records, config.total_updates), &out)?;
            eprintln!("plot data: {}", out.display());
            Ok(())
        }
    }
}

fn load_config(args: &ExperimentArgs) -> Result<(ExperimentConfig, PathBuf)> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(updates) = args.updates {
        config.total_updates = updates;
    }
    config.validate()?;
    let base = args.out_dir.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    Ok((config, base))
}

fn report(summary: &ExperimentSummary, dir: &Path) -> Result<()> {
    print_json(summary)?;
    eprintln!("results: {}", dir.display());
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
