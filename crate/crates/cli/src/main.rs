//! `cremona-lab`: runs the parity experiments and prints JSON verdict reports.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "cremona-lab", version, about = "Parity experiments for Cremona transformations over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock time in `runtime_ms` (otherwise null).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite field construction data.
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    /// Cremona map realizing an odd permutation of P^2(F_q).
    Realize(QArg),
    /// Parity of projective linear maps.
    Pgl {
        #[command(subcommand)]
        cmd: PglCmd,
    },
    /// Cycle census of the cyclic-shift generator B_n.
    Bn {
        #[command(subcommand)]
        cmd: BnCmd,
    },
    /// Quadratic involution with a degree-3 base orbit.
    Quadratic(QArg),
    /// Geiser involutions on random degree-2 del Pezzo surfaces.
    Geiser(SampleArgs),
    /// Bertini involutions on random degree-1 del Pezzo surfaces.
    Bertini(SampleArgs),
    /// Parity of random fibered permutations.
    Bundles(BundleArgs),
    /// Exhaustive quintic transformation scan.
    Quintic {
        #[command(subcommand)]
        cmd: QuinticCmd,
    },
}

#[derive(Debug, Args)]
struct QArg {
    /// Field order, a prime power.
    #[arg(long)]
    q: u64,
}

#[derive(Debug, Subcommand)]
enum FieldCmd {
    Info {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m: u32,
    },
}

#[derive(Debug, Subcommand)]
enum PglCmd {
    Parity {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        /// Number of random elements (default 1000).
        #[arg(long, conflicts_with = "exhaustive")]
        sample: Option<u64>,
        #[arg(long, default_value_t = 0, conflicts_with = "exhaustive")]
        seed: u64,
        /// Enumerate all of PGL_{n+1}(F_q).
        #[arg(long)]
        exhaustive: bool,
    },
}

#[derive(Debug, Subcommand)]
enum BnCmd {
    Census {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BundleArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest base set size.
    #[arg(long, default_value_t = 4)]
    max_base: usize,
}

#[derive(Debug, Subcommand)]
enum QuinticCmd {
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long)]
    q: u64,
    /// Comma-separated pattern ids 1-10 (default: all).
    #[arg(long, value_delimiter = ',')]
    patterns: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1024)]
    block_size: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, env = "CREMONA_LAB_JOBS", default_value_t = 0)]
    jobs: usize,
    /// Line-delimited JSON checkpoint file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from the checkpoint.
    #[arg(long, requires = "checkpoint")]
    resume: bool,
    /// Stop after this many blocks, leaving a partial checkpoint.
    #[arg(long, hide = true)]
    stop_after_blocks: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match commands::execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    eprintln!("{}", report.summary());
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if report.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
