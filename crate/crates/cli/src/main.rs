use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levyhull::experiments::{ExperimentConfig, Verdict};
use levyhull::report::{list_experiments, load_config, resolve_threads, run_all_with, smoke_suite, RunOptions};
use levyhull::Error;

/// Monte Carlo checks for convex hulls of Lévy processes.
#[derive(Parser)]
#[command(name = "levyhull", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the master seed of every experiment.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (LEVYHULL_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the first sampled hull of each experiment as JSON.
    #[arg(long, global = true)]
    dump_polytopes: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a JSON config file.
    Run { config: PathBuf },
    /// Run the built-in short suite.
    Smoke,
    /// Print the experiment kinds.
    ListExperiments,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        _ => 2,
    }
}

// a closed pipe is not an error worth reporting
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn execute(cli: &Cli, mut configs: Vec<ExperimentConfig>) -> Result<u8, Error> {
    if let Some(seed) = cli.seed {
        configs.iter_mut().for_each(|c| c.master_seed = seed);
    }
    let opts = RunOptions {
        threads: resolve_threads(cli.threads)?,
        dump_polytopes: cli.dump_polytopes,
    };
    let manifest = run_all_with(&configs, &cli.out, &opts)?;
    let mut text = String::new();
    for (name, v) in &manifest.verdicts {
        let _ = writeln!(text, "{:<4} {name}", v.as_str());
        if *v == Verdict::Fail {
            for r in manifest.results.iter().filter(|r| &r.experiment == name && r.verdict == Verdict::Fail) {
                let _ = writeln!(
                    text,
                    "       j={} {} mean={} stderr={} target={:?}",
                    r.j.map(|j| j.to_string()).unwrap_or_else(|| "-".into()),
                    r.param_json(),
                    r.estimate.mean,
                    r.estimate.stderr,
                    r.estimate.target_value()
                );
            }
        }
    }
    let _ = writeln!(text, "results in {}", cli.out.display());
    emit(&text);
    Ok(manifest.exit_status() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ListExperiments => {
            let text: String = list_experiments().into_iter().map(|(name, desc)| format!("{name:<24} {desc}\n")).collect();
            emit(&text);
            Ok(0)
        }
        Command::Smoke => execute(&cli, smoke_suite(cli.seed.unwrap_or(0))),
        Command::Run { config } => load_config(config).and_then(|c| execute(&cli, c)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
