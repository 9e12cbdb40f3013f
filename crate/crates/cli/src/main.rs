use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nregions_cli::{format_verdict, parse_trajectory, run_analyze, run_feasibility, CliError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "nregions", version, about = "N-connected regions of a five-bar parallel manipulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the workspace and its N-connected regions.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated figures: workspace, regions, region-<id>, loci.
        #[arg(long, value_delimiter = ',')]
        render: Option<Vec<String>>,
        /// Compare against the dense grid oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Check whether a point-to-point trajectory stays in one region.
    Feasibility {
        #[command(flatten)]
        common: Common,
        /// File of "x y" lines.
        #[arg(long)]
        trajectory: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    depth_q: Option<u32>,
    #[arg(long = "depth-4")]
    depth_4: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Identify the lower and upper limits of both joints.
    #[arg(long)]
    periodic: bool,
}

impl Common {
    fn overrides(&self, render: Option<Vec<String>>) -> Overrides {
        Overrides {
            depth_q: self.depth_q,
            depth_4: self.depth_4,
            epsilon: self.epsilon,
            periodic: self.periodic,
            render,
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Analyze { common, out, render, oracle } => {
            let cfg = RunConfig::load(&common.config, &common.overrides(render))?;
            let report = run_analyze(&cfg, &out, oracle)?;
            println!(
                "{} components, {} regions, max coverage {:.4}: {}",
                report.component_count,
                report.region_count,
                report.max_coverage,
                if report.n_connected { "N-connected" } else { "not N-connected" }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Feasibility { common, trajectory } => {
            let cfg = RunConfig::load(&common.config, &common.overrides(None))?;
            let text = std::fs::read_to_string(&trajectory)
                .map_err(|e| CliError::Config(format!("{}: {e}", trajectory.display())))?;
            let t = parse_trajectory(&text)?;
            let verdict = run_feasibility(&cfg, &t)?;
            print!("{}", format_verdict(&t, &verdict));
            Ok(if verdict.feasible { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
