use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use catlab::{exit, CliResult, Context, Output, RunReport, REPORT_VERSION};
use catlab_core::lab::DEFAULT_MAX_DEPTH;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "catlab", version, about = "Projective-measurement laboratory: no-go checks, protocol runs, discrimination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Scenario file
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, env = "CATLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Add wall time to the report (makes reruns differ)
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Adjoin a candidate measurement and search for a forbidden transition
    Check {
        #[command(flatten)]
        common: Common,
        candidate: String,
        /// Forbidden source state (default: every declared forbidden pair)
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        depth: usize,
    },
    /// Run a protocol by Monte Carlo, or exactly with --exact
    Run {
        #[command(flatten)]
        common: Common,
        protocol: String,
        #[arg(long)]
        initial: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        exact: bool,
        /// Worker threads for sampling (0: one per core)
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Compare two sources under one measurement
    Discriminate {
        #[command(flatten)]
        common: Common,
        source_a: String,
        source_b: String,
        #[arg(long)]
        measurement: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Print the full outcome tree of a protocol
    Enumerate {
        #[command(flatten)]
        common: Common,
        protocol: String,
        #[arg(long)]
        initial: Option<String>,
    },
}

fn execute(command: &Command) -> CliResult<(Output, &Common, Context)> {
    let common = match command {
        Command::Check { common, .. }
        | Command::Run { common, .. }
        | Command::Discriminate { common, .. }
        | Command::Enumerate { common, .. } => common,
    };
    let ctx = Context::load(&common.scenario)?;
    let out = match command {
        Command::Check { candidate, from, to, depth, .. } => {
            catlab::check(&ctx, candidate, from.as_deref(), to.as_deref(), *depth)?
        }
        Command::Run { protocol, initial, trials, exact, threads, .. } => {
            let threads = if *threads == 0 { catlab::parallel::default_threads() } else { *threads };
            catlab::run(&ctx, protocol, initial.as_deref(), *exact, *trials, common.seed, threads)?
        }
        Command::Discriminate { source_a, source_b, measurement, trials, .. } => {
            catlab::discriminate_sources(&ctx, source_a, source_b, measurement, *trials, common.seed)?
        }
        Command::Enumerate { protocol, initial, .. } => catlab::enumerate_tree(&ctx, protocol, initial.as_deref())?,
    };
    Ok((out, common, ctx))
}

fn render(cli: &Cli, started: Instant) -> CliResult<(String, bool)> {
    let (out, common, ctx) = execute(&cli.command)?;
    let text = match common.format {
        Format::Csv => catlab::to_csv(&out.rows)?,
        Format::Json => RunReport {
            report_version: REPORT_VERSION,
            command: std::iter::once("catlab".to_owned()).chain(std::env::args().skip(1)).collect(),
            seed: common.seed,
            scenario: ctx.source.clone(),
            result: out.result,
            wall_time_ms: common.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
        }
        .to_json()?,
    };
    Ok((text, out.violation))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT_ERROR } else { exit::OK });
        }
    };
    // the exit-code contract is 0/1/2, so an internal panic must not surface as 101
    let rendered = std::panic::catch_unwind(|| render(&cli, started));
    let Ok(rendered) = rendered else {
        return ExitCode::from(exit::INPUT_ERROR);
    };
    match rendered {
        Ok((text, violation)) => {
            if std::io::stdout().write_all(text.as_bytes()).is_err() {
                return ExitCode::from(exit::INPUT_ERROR);
            }
            ExitCode::from(if violation { exit::VIOLATION } else { exit::OK })
        }
        Err(e) => {
            eprintln!("catlab: {e}");
            ExitCode::from(exit::INPUT_ERROR)
        }
    }
}
