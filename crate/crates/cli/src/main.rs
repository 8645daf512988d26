//! `modal-barrier`: spectral barriers, resistances and transmission
//! simulations from the command line.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::report::{CliError, OutputArgs};

#[derive(Debug, Parser)]
#[command(name = "modal-barrier", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Laplacian eigenvalues in ascending order.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Cluster count from the largest relative eigengap.
    DetectQ {
        #[command(flatten)]
        graph: GraphArgs,
        /// Largest q considered; defaults to min(n - 1, 32).
        #[arg(long)]
        max_q: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Per-edge aggregated resistance.
    Resistance {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        resistance: ResistanceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Barrier, shuffled or unit edge weights.
    Weights {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value_t = WeightMode::Barrier)]
        mode: WeightMode,
        #[command(flatten)]
        barrier: BarrierArgs,
        /// Seed of the weight shuffle.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Discrete diffusion from a unit mass.
    Diffuse {
        #[command(flatten)]
        graph: GraphArgs,
        /// Edge weights CSV; unit weights when omitted.
        #[arg(long)]
        weights_file: Option<PathBuf>,
        #[command(flatten)]
        diffusion: DiffusionArgs,
        /// Extra vertices whose series are written.
        #[arg(long = "track", value_name = "VERTEX")]
        track: Vec<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo mean epidemic curve.
    Epidemic {
        #[command(flatten)]
        graph: GraphArgs,
        /// Edge weights CSV; unit weights when omitted.
        #[arg(long)]
        weights_file: Option<PathBuf>,
        #[command(flatten)]
        epidemic: EpidemicArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluates the spectral bounds on a graph and partition.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        /// `vertex_id cluster_id` per line.
        #[arg(long)]
        partition_file: PathBuf,
        /// Same topology with perturbed weights, for the robustness bound.
        #[arg(long)]
        compare_graph: Option<PathBuf>,
        /// Estimated average relative outgoing weight, for the resolvent bound.
        #[arg(long, requires = "alpha_hat")]
        a_hat: Option<f64>,
        /// Estimated realizability level in (0, 1), for the resolvent bound.
        #[arg(long, requires = "a_hat")]
        alpha_hat: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Unit, barrier and shuffled weights side by side.
    Compare {
        #[command(subcommand)]
        what: CompareCommand,
    },
    /// Writes a seeded synthetic graph as an edge list.
    Generate {
        #[command(flatten)]
        generate: GenerateArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
enum CompareCommand {
    /// Target-vertex series and crossing times.
    Diffusion {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        barrier: BarrierArgs,
        #[command(flatten)]
        diffusion: DiffusionArgs,
        /// Seed of the weight shuffle.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Mean epidemic curves and their peaks; `--seed` also drives the shuffle.
    Epidemic {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        barrier: BarrierArgs,
        #[command(flatten)]
        epidemic: EpidemicArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
struct GraphArgs {
    /// Edge list: `i j` or `i j w` per line, `#` comments.
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Auto,
    Weighted,
    Unweighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    /// Exact below the dense-eigensolver size limit, approx-ii above it.
    Auto,
    Exact,
    ApproxI,
    ApproxIi,
    Distributed,
}

#[derive(Debug, Clone, Args, Serialize)]
struct ResistanceArgs {
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    /// Modes aggregated by the exact method; detected from the eigengap when omitted.
    #[arg(long)]
    q: Option<usize>,
    /// Resolvent shift for the approximations.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Neumann order; defaults to ceil(n / 2).
    #[arg(long)]
    p: Option<usize>,
    /// Distributed only: drop row entries below this magnitude.
    #[arg(long, default_value_t = 0.0)]
    prune: f64,
    /// Distributed only: run the published pseudocode verbatim.
    #[arg(long)]
    paper_literal: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
struct BarrierArgs {
    /// Resistance CSV to use instead of computing one.
    #[arg(long)]
    resistance_file: Option<PathBuf>,
    #[command(flatten)]
    resistance: ResistanceArgs,
    /// Barrier softness in eps_b / (eps_b + r).
    #[arg(long, default_value_t = 0.01)]
    epsilon_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WeightMode {
    Barrier,
    Shuffled,
    Unit,
}

#[derive(Debug, Clone, Args, Serialize)]
struct DiffusionArgs {
    /// Vertex holding the initial unit mass.
    #[arg(long)]
    start: String,
    /// Vertex whose threshold crossing is reported.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Step size; defaults to a tenth of the largest stable value.
    #[arg(long)]
    kappa: Option<f64>,
    /// Crossing threshold; defaults to 0.5 / n.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct EpidemicArgs {
    /// Daily transmission probability across a unit-weight edge.
    #[arg(long, default_value_t = 0.03)]
    pa: f64,
    /// Last simulated day.
    #[arg(long, default_value_t = 120)]
    days: usize,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertex label, or `random` for a fresh draw per run.
    #[arg(long, default_value = "random")]
    patient_zero: String,
    #[arg(long, value_enum, default_value_t = Count::Infected)]
    count: Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Count {
    /// Exposed plus contagious.
    Infected,
    ContagiousOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    /// Dense clusters, sparse low-weight bridges.
    Planted,
    /// Dense clusters with unit-weight cross links.
    Contact,
    Random,
    Path,
    Star,
    Complete,
    Barbell,
}

#[derive(Debug, Clone, Args, Serialize)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Family::Planted)]
    family: Family,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertices (random, path, complete), leaves (star) or clique size (barbell).
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Planted/contact: number of clusters.
    #[arg(long)]
    clusters: Option<usize>,
    /// Planted/contact: vertices per cluster.
    #[arg(long)]
    cluster_size: Option<usize>,
    #[arg(long)]
    p_in: Option<f64>,
    #[arg(long)]
    p_out: Option<f64>,
    #[arg(long)]
    w_in: Option<f64>,
    #[arg(long)]
    w_out: Option<f64>,
    /// Random: probability of each non-tree edge.
    #[arg(long, default_value_t = 0.1)]
    p_extra: f64,
    /// Random: weight range.
    #[arg(long, default_value_t = 1.0)]
    w_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    w_hi: f64,
    /// Barbell: weight of the bridge.
    #[arg(long, default_value_t = 0.01)]
    bridge: f64,
    /// Also write the planted partition here.
    #[arg(long)]
    partition_output: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MODAL_BARRIER_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            CliError::invalid("cli", format!("MODAL_BARRIER_THREADS must be a positive integer, got {raw:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::invalid("cli", format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Spectrum { graph, out } => commands::spectrum(&graph, &out),
        Command::DetectQ { graph, max_q, out } => commands::detect_q(&graph, max_q, &out),
        Command::Resistance { graph, resistance, out } => commands::resistance(&graph, &resistance, &out),
        Command::Weights { graph, mode, barrier, seed, out } => {
            commands::weights(&graph, mode, &barrier, seed, &out)
        }
        Command::Diffuse { graph, weights_file, diffusion, track, out } => {
            commands::diffuse(&graph, weights_file.as_deref(), &diffusion, &track, &out)
        }
        Command::Epidemic { graph, weights_file, epidemic, out } => {
            commands::epidemic(&graph, weights_file.as_deref(), &epidemic, &out)
        }
        Command::Verify { graph, partition_file, compare_graph, a_hat, alpha_hat, out } => commands::verify(
            &graph,
            &partition_file,
            compare_graph.as_deref(),
            a_hat.zip(alpha_hat),
            &out,
        ),
        Command::Compare { what } => match what {
            CompareCommand::Diffusion { graph, barrier, diffusion, seed, out } => {
                commands::compare_diffusion(&graph, &barrier, &diffusion, seed, &out)
            }
            CompareCommand::Epidemic { graph, barrier, epidemic, out } => {
                commands::compare_epidemic(&graph, &barrier, &epidemic, &out)
            }
        },
        Command::Generate { generate, out } => commands::generate(&generate, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let err = CliError::invalid("cli", e.kind().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
