//! `graphcert` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 domain or I/O
//! error. Failures also print one JSON object on stderr.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, Failure};

#[derive(Parser, Debug)]
#[command(
    name = "graphcert",
    version,
    about = "Bell-inequality certification of graph states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a Bell inequality with its bounds and optimal settings.
    Inequality(CommonArgs),
    /// Evaluate a (noisy) target and report a self-testing verdict.
    Certify(RunArgs),
    /// Sweep a noise parameter and emit a violation/fidelity series.
    Sweep(SweepArgs),
    /// Print classical and quantum bounds, optionally checked by enumeration.
    Bounds(BoundsArgs),
    /// Estimate the fidelity with the target from its stabilizer decomposition.
    Fidelity(FidelityArgs),
    /// Sample raw outcome counts for every joint setting of the inequality.
    Sample(RunArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// State family: ghz, cluster or ring.
    #[arg(long)]
    pub family: Option<String>,
    /// Number of qubits for --family.
    #[arg(long)]
    pub n: Option<usize>,
    /// Graph file: "N; 1-2 2-3 ..." or JSON {"n": N, "edges": [[1, 2], ...]}.
    #[arg(long)]
    pub graph: Option<std::path::PathBuf>,
    /// JSON file with defaults for any flag; explicit flags win.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
    /// Output format: json, csv or text.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct StatsArgs {
    /// Noise: none, white:<v> or depol:<p>.
    #[arg(long)]
    pub noise: Option<String>,
    /// Exact expectation values (the default when --shots is absent).
    #[arg(long)]
    pub exact: bool,
    /// Shots per joint setting.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Master seed; required with --shots.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub stats: StatsArgs,
}

#[derive(Args, Debug, Clone)]
pub struct FidelityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub stats: StatsArgs,
    /// Print the decomposition itself instead of an estimate.
    #[arg(long)]
    pub decomposition: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Noise model to sweep: white or depol.
    #[arg(long)]
    pub noise: Option<String>,
    /// Parameter grid "start:stop:steps".
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also enumerate all deterministic strategies (N <= 10).
    #[arg(long)]
    pub brute_force: bool,
}

fn run(command: Command) -> Result<(), Failure> {
    let config_path = match &command {
        Command::Inequality(c) => c.config.clone(),
        Command::Certify(r) | Command::Sample(r) => r.common.config.clone(),
        Command::Sweep(s) => s.common.config.clone(),
        Command::Bounds(b) => b.common.config.clone(),
        Command::Fidelity(f) => f.common.config.clone(),
    };
    let file = ConfigFile::load(config_path.as_deref())?;
    match command {
        Command::Inequality(c) => commands::inequality(&c, &file),
        Command::Certify(r) => commands::certify(&r, &file),
        Command::Sweep(s) => commands::sweep(&s, &file),
        Command::Bounds(b) => commands::bounds(&b, &file),
        Command::Fidelity(f) => commands::fidelity(&f, &file),
        Command::Sample(r) => commands::sample(&r, &file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            Failure::Usage(e.render().to_string().trim().to_string()).report();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.exit_code())
        }
    }
}
