use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gthsgd::cli;

#[derive(Parser)]
#[command(name = "gthsgd", version, about = "Decentralized stochastic optimization simulator")]
struct Args {
    /// Output directory for CSV, metadata and SVG files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration.
    Run { config: PathBuf },
    /// Run a sweep of configurations with seed replication.
    Compare { spec: PathBuf },
    /// Print a topology's weights, lambda, step-size cap and validation report.
    Spectrum {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "L", default_value_t = 1.0)]
        smoothness: f64,
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let threads = cli::threads_from_env();
    let (mut stdout, mut stderr) = (io::stdout(), io::stderr());
    let code = match args.command {
        Command::Run { config } => {
            let out = args.out.unwrap_or_else(|| PathBuf::from("out"));
            cli::cmd_run(&config, &out, threads, &mut stdout, &mut stderr)
        }
        Command::Compare { spec } => cli::cmd_compare(&spec, args.out.as_deref(), threads, &mut stdout, &mut stderr),
        Command::Spectrum {
            family,
            n,
            smoothness,
            matrix,
        } => cli::cmd_spectrum(&family, n, smoothness, matrix.as_deref(), &mut stdout, &mut stderr),
    };
    ExitCode::from(code as u8)
}
