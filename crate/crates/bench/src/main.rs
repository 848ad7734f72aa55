use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tneda::engine::Preset;
use tneda_bench::config::parse_seed_range;
use tneda_bench::records::read_run_file;
use tneda_bench::summary::{read_runs, summarize, write_summary_csv};
use tneda_bench::{run_experiment, BenchError, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "tneda", version, about = "Run and summarize tensor-network EDA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Half-open seed range `a..b`, replacing the config's seeds.
        #[arg(long)]
        seeds: Option<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory (default: the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize the run files of a directory into a CSV.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Call-count bucket width.
        #[arg(long, default_value_t = 1000)]
        bucket: usize,
    },
    /// Validate run files against the record schema.
    Check {
        files: Vec<PathBuf>,
    },
    /// Print a preset's full solver settings as JSON.
    Preset {
        name: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run {
            config,
            seeds,
            jobs,
            out,
        } => {
            let (cfg, base) = ExperimentConfig::load(&config)?;
            let opts = RunOptions {
                seeds: seeds.as_deref().map(parse_seed_range).transpose()?,
                jobs,
                out,
            };
            let output = run_experiment(&cfg, &base, &opts)?;
            println!(
                "{} runs written to {}; summary {}",
                output.run_files.len(),
                output.dir.display(),
                output.summary.display()
            );
        }
        Command::Summarize { input, out, bucket } => {
            let runs = read_runs(&input)?;
            let rows = summarize(&runs, bucket)?;
            write_summary_csv(&rows, &out)?;
            println!("{} runs summarized into {}", runs.len(), out.display());
        }
        Command::Check { files } => {
            if files.is_empty() {
                return Err(BenchError::Config("no files given".into()));
            }
            for f in &files {
                let n = read_run_file(f)?.len();
                println!("{}: {n} records ok", f.display());
            }
        }
        Command::Preset { name } => {
            let preset: Preset = name.parse().map_err(|e: tneda::Error| BenchError::Config(e.to_string()))?;
            println!("{}", serde_json::to_string_pretty(&preset.config()).expect("presets serialize"));
        }
    }
    Ok(())
}
