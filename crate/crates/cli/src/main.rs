use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sagin_core::experiment::{ExactPolicy, Experiment, ReportFormat};
use sagin_core::Error;

mod bench;
mod place;

#[derive(Parser)]
#[command(name = "sagin", version, about = "Satellite gateway and SDN controller placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place gateways, controllers or both on one topology.
    Place(PlaceArgs),
    /// Run one of the experiments A-D over repeated failure samples.
    Bench(BenchArgs),
    /// List the bundled topologies.
    Topologies,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Gateway,
    Controller,
    Joint,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Latency,
    Reliability,
    Overhead,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Approx,
    Exact,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactArg {
    Auto,
    Never,
    Always,
}

impl From<ExactArg> for ExactPolicy {
    fn from(e: ExactArg) -> Self {
        match e {
            ExactArg::Auto => ExactPolicy::Auto,
            ExactArg::Never => ExactPolicy::Never,
            ExactArg::Always => ExactPolicy::Always,
        }
    }
}

/// Objective weights and solver knobs shared by both subcommands.
#[derive(Args, Clone)]
pub struct Knobs {
    /// Weight of node-to-gateway latency against the gateway count.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Weight of the synchronisation cost.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Weight of the controller block in the joint cost.
    #[arg(long, default_value_t = 1.0)]
    pub psi: f64,
    /// Load-proportional synchronisation rate.
    #[arg(long, default_value_t = 0.1)]
    pub lcon: f64,
    /// Gateway budget.
    #[arg(long, default_value_t = 5)]
    pub gmax: usize,
    /// Controller budget.
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    /// Candidate paths per node pair for reliability.
    #[arg(long, default_value_t = 1)]
    pub kpaths: usize,
    /// Threshold decay of the budgeted greedy.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Double greedy restarts.
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct PlaceArgs {
    #[arg(value_enum)]
    pub target: Target,
    /// Bundled topology name, GraphML file or topology JSON file.
    #[arg(long)]
    pub topo: String,
    #[arg(long, value_enum, default_value = "latency")]
    pub mode: Mode,
    #[arg(long, value_enum, default_value = "approx")]
    pub method: MethodArg,
    /// Sample failure probabilities from this case (1-4) before solving.
    #[arg(long)]
    pub case: Option<u8>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include solver wall time in the output.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub knobs: Knobs,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Experiment A, B, C or D.
    #[arg(long)]
    pub exp: Experiment,
    /// Comma-separated topologies.
    #[arg(long, value_delimiter = ',', default_value = "Nsfnet,Sinet,Ans")]
    pub topo: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Failure case 1-4.
    #[arg(long, default_value_t = 1)]
    pub case: u8,
    /// Parameter sweep `key=v1,v2,...` over alpha, beta, gmax, kmax or case.
    /// Repeat for a grid.
    #[arg(long)]
    pub sweep: Vec<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// When to add the exact baseline.
    #[arg(long, value_enum, default_value = "auto")]
    pub exact: ExactArg,
    /// Recompute every reported metric from the emitted policies.
    #[arg(long)]
    pub verify: bool,
    /// Write the latency and reliability tables of trial 0.
    #[arg(long)]
    pub dump_tables: bool,
    /// Worker threads; 1 runs serially.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Record solver wall time (output is then no longer reproducible).
    #[arg(long)]
    pub timing: bool,
    /// Also write figure series: lat_gw, gw_tradeoff, rel_cases,
    /// rel_vs_budget, sync_tradeoff or runtime.
    #[arg(long)]
    pub figure: Vec<String>,
    #[command(flatten)]
    pub knobs: Knobs,
}

/// Failure with the process exit code it maps to.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InstanceTooLarge { .. } => 3,
            Error::Io(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Place(args) => place::run(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Topologies => {
            for name in sagin_core::topology::registry::names() {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
