use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cnp_core::CnpError;

mod commands;
mod config;

/// Rejected input detected outside the core library (files, flags, config).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct BadInput(pub String);

#[derive(Parser, Debug)]
#[command(name = "cnp-lab", version, about = "Experiments with end spaces, non-peripheral curve graphs and mapping class group words")]
pub struct Cli {
    /// Run configuration (JSON); defaults to $CNP_LAB_CONFIG.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// End-space JSON for commands that do not take it positionally.
    #[arg(long, global = true)]
    pub space: Option<PathBuf>,
    /// Print the machine-readable JSON report instead of the summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GraphOpts {
    #[arg(long)]
    pub level: Option<usize>,
    /// Complexity cap for curve enumeration.
    #[arg(long)]
    pub cap: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Complexity of the surface.
    Zeta { space: PathBuf },
    /// Anchor blocks and shift tracks.
    Anchor { space: PathBuf },
    /// Smallness of a clopen profile.
    Small { space: PathBuf, profile: PathBuf },
    /// Builds a combinatorial window.
    Window {
        space: PathBuf,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geometric intersection number of two curves.
    Isect { a: PathBuf, b: PathBuf },
    /// End partition cut out by a separating curve.
    Partition { curve: PathBuf },
    /// Ball in the non-peripheral curve graph.
    CnpBall {
        #[command(flatten)]
        opts: GraphOpts,
        /// Center curve; defaults to the first enumerated vertex.
        #[arg(long)]
        center: Option<PathBuf>,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Surgery path between two non-peripheral curves.
    CnpPath {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        opts: GraphOpts,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Four-point hyperbolicity estimate on a ball.
    ProbeDelta {
        #[command(flatten)]
        opts: GraphOpts,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Annular twisting of two markings about an axis.
    Twist {
        #[arg(long)]
        axis: PathBuf,
        x: PathBuf,
        y: PathBuf,
    },
    /// Upper and certified lower bounds on a word norm.
    Norm {
        #[arg(long)]
        word: PathBuf,
        #[arg(long)]
        witnesses: PathBuf,
        /// Level of the base window of the ambient chain.
        #[arg(long, default_value_t = 0)]
        base: usize,
        #[arg(long, default_value_t = 1)]
        headroom: usize,
    },
    /// Quasi-flat certificate for a disjoint family of k curves.
    RankCert {
        #[arg(long)]
        k: usize,
        #[arg(long = "box")]
        box_size: i64,
        /// Twist powers used to fit the additive constant.
        #[arg(long, default_value_t = 10)]
        range: i64,
    },
    /// Hybrid curve and grand-arc graph.
    Hybrid {
        #[arg(long)]
        variant: String,
        #[command(flatten)]
        opts: GraphOpts,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Detour lengths against scale.
    Divergence {
        #[arg(long = "R", value_delimiter = ',', required = true)]
        scales: Vec<u64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Growth table CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Certificates together with every constant.
        #[arg(long)]
        certs: Option<PathBuf>,
    },
    /// Calibrates the detour constants and writes a run config holding them.
    Calibrate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// 1: bad input, 2: hypothesis violation, 3: cap or overflow.
fn exit_code(err: &anyhow::Error) -> u8 {
    use CnpError::*;
    match err.downcast_ref::<CnpError>() {
        Some(HypothesisViolation(_) | TooFewTypes | NoSelector | ConstantInfeasible(_) | Undecided | NotEssential(_) | NotSeparating | DisconnectedBall | EmptyProjection | AnnularSpec) => 2,
        Some(CapExceeded(_) | WindowOverflow | TruncationExceeded { .. } | Unreachable) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("report serializes"));
            } else {
                print!("{}", report.summary);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
