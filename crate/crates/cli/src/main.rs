//! mpec-kit: exact first-order analysis of an MPEC at a supplied point.
//!
//! Exit status: 0 on success, 2 when any verdict in the report is
//! inconclusive, 1 on errors (bad flags, unreadable files, schema
//! violations, oracle mismatches).

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mpec_core::tangent::SampleConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(
    name = "mpec-kit",
    version,
    about = "Exact multiplier sets, critical cones, tangent cones, constraint \
             qualifications and stationarity certificates for MPECs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format for the analysis report.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Feasibility report and active/degenerate index sets.
    Check {
        instance: PathBuf,
        /// The point (x, y) as comma-separated rationals, e.g. 0,1/2,0.
        #[arg(long)]
        point: String,
    },
    /// Multiplier set M(z), extreme points, and CQ flags.
    Multipliers {
        instance: PathBuf,
        #[arg(long)]
        point: String,
    },
    /// Directional critical set, critical multipliers and the dual LP.
    Critical {
        instance: PathBuf,
        #[arg(long)]
        point: String,
        /// Upper-level direction dx as comma-separated rationals.
        #[arg(long)]
        dx: String,
        /// Lower-level multiplier; defaults to the unique one when M(z)
        /// is a singleton.
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Tangent cone, MPEC linearized cone, convex hull and CQ check.
    Cones {
        instance: PathBuf,
        #[arg(long)]
        point: String,
        /// Multiplier list: `extreme` or `list:<file>`.
        #[arg(long, default_value = "extreme")]
        multipliers: String,
        /// Sampling oracle seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per branch for the floating oracle.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Radius schedule, comma-separated floats (largest first).
        #[arg(long)]
        radii: Option<String>,
    },
    /// Primal and primal-dual stationarity verification.
    Stationarity {
        instance: PathBuf,
        #[arg(long)]
        point: String,
        /// Multiplier list: `extreme` or `list:<file>`.
        #[arg(long, default_value = "extreme")]
        multipliers: String,
        /// List every partition system with its certificate.
        #[arg(long)]
        all_partitions: bool,
    },
    /// Emit the KKT-reformulated NLP of the lower-level equilibrium.
    KktReformulate { instance: PathBuf },
    /// Run the main implementations against the brute-force oracles.
    CrossCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            match cli.format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => println!("{}", report.to_json()),
            }
            match report.exit_code() {
                0 => ExitCode::SUCCESS,
                2 => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<report::AnalysisReport> {
    match &cli.command {
        Command::Check { instance, point } => {
            let (inst, digest) = commands::load(instance)?;
            let z = commands::parse_point(&inst, point)?;
            commands::check(&inst, &digest, &z)
        }
        Command::Multipliers { instance, point } => {
            let (inst, digest) = commands::load(instance)?;
            let z = commands::parse_point(&inst, point)?;
            commands::multipliers_cmd(&inst, &digest, &z)
        }
        Command::Critical {
            instance,
            point,
            dx,
            lambda,
        } => {
            let (inst, digest) = commands::load(instance)?;
            let z = commands::parse_point(&inst, point)?;
            let dx = commands::parse_rat_list(dx)?;
            let lambda = lambda
                .as_deref()
                .map(commands::parse_rat_list)
                .transpose()?;
            commands::critical(&inst, &digest, &z, &dx, lambda)
        }
        Command::Cones {
            instance,
            point,
            multipliers,
            seed,
            samples,
            radii,
        } => {
            let (inst, digest) = commands::load(instance)?;
            let z = commands::parse_point(&inst, point)?;
            let mut config = SampleConfig {
                seed: *seed,
                count: *samples,
                ..SampleConfig::default()
            };
            if let Some(r) = radii {
                config.radii = r
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|_| anyhow::anyhow!("bad radius `{x}`"))
                    })
                    .collect::<Result<_, _>>()?;
            }
            commands::cones_cmd(&inst, &digest, &z, multipliers, &config)
        }
        Command::Stationarity {
            instance,
            point,
            multipliers,
            all_partitions,
        } => {
            let (inst, digest) = commands::load(instance)?;
            let z = commands::parse_point(&inst, point)?;
            commands::stationarity_cmd(&inst, &digest, &z, multipliers, *all_partitions)
        }
        Command::KktReformulate { instance } => {
            let (inst, digest) = commands::load(instance)?;
            commands::kkt_cmd(&inst, &digest)
        }
        Command::CrossCheck { seed, trials } => commands::cross_check(*seed, *trials),
    }
}
