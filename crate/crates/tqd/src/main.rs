use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use tqd::config::ExperimentConfig;
use tqd::output::write_csv;
use tqd::run::{self, RunOutput};
use tqd::verify;

#[derive(Parser, Debug)]
#[command(name = "tqd", version, about = "Counterdiabatic driving experiments for spin models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fidelity against the adiabatic state on the output grid.
    Trace(RunArgs),
    /// Final fidelity per size and protocol.
    Sweep(RunArgs),
    /// Randomized closed-form versus generic-construction checks.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
    },
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(short, long)]
    config: PathBuf,
    /// CSV destination; overrides `output` in the config, stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads for independent runs. TQD_JOBS takes precedence.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn jobs(flag: usize) -> anyhow::Result<usize> {
    match std::env::var("TQD_JOBS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => bail!("TQD_JOBS must be a positive integer, got `{v}`"),
        },
        Err(_) if flag >= 1 => Ok(flag),
        Err(_) => bail!("--jobs must be at least 1"),
    }
}

fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_json(&text).with_context(|| format!("config {}", path.display()))
}

fn emit(out: &RunOutput, dest: Option<&Path>) -> anyhow::Result<()> {
    match dest {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_csv(BufWriter::new(f), &out.records)?;
        }
        None => write_csv(io::stdout().lock(), &out.records)?,
    }
    Ok(())
}

fn run(args: &RunArgs, sweep: bool) -> anyhow::Result<i32> {
    let cfg = load(&args.config)?;
    let threads = jobs(args.jobs)?;
    let out = if sweep { run::sweep(&cfg, threads)? } else { run::trace(&cfg, threads)? };
    for m in &out.messages {
        eprintln!("tqd: {m}");
    }
    emit(&out, args.output.as_deref().or(cfg.output.as_deref()))?;
    Ok(out.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Trace(args) => run(args, false),
        Command::Sweep(args) => run(args, true),
        Command::Verify { seed, samples } => {
            let results = verify::run_checks(*seed, *samples as usize);
            let text = verify::report(*seed, *samples as usize, &results);
            let mut stdout = io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            match results.iter().find(|r| !r.passed()) {
                None => Ok(0),
                Some(_) => {
                    let worst = results.iter().filter(|r| !r.passed()).map(|r| r.worst / r.tolerance).fold(0.0, f64::max);
                    eprintln!("tqd: verification failed, worst deviation {worst:.3e} x tolerance");
                    Ok(1)
                }
            }
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("tqd: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
