//! Thin command-line front end over the library: argument parsing, config
//! loading and exit codes (0 ok, 1 validation failure, 2 usage error).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spdc::cli::{self, MapKind};
use spdc::formats::HeatmapScale;
use spdc::validate;

#[derive(Parser)]
#[command(
    name = "spdc",
    about = "Type-I SPDC angular spectra and OAM correlations for Bessel-Gauss pump beams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// Run configuration file (section.key = value grammar).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts and the summary record.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct MapArgs {
    /// Compute only the full-quadrature map.
    #[arg(long, conflicts_with = "analytic")]
    numeric: bool,
    /// Compute only the closed-form map.
    #[arg(long)]
    analytic: bool,
    /// Both maps (default).
    #[arg(long, conflicts_with_all = ["numeric", "analytic"])]
    both: bool,
    /// Heatmap gray mapping.
    #[arg(long, value_parser = ["linear", "log"], default_value = "linear")]
    scale: String,
}

impl MapArgs {
    fn kind(&self) -> MapKind {
        match (self.numeric, self.analytic) {
            (true, false) => MapKind::Numeric,
            (false, true) => MapKind::Analytic,
            _ => MapKind::Both,
        }
    }

    fn scale(&self) -> HeatmapScale {
        if self.scale == "log" {
            HeatmapScale::Log
        } else {
            HeatmapScale::Linear
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Derived indices, walk-off and emission-cone geometry report.
    Indices {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Angular spectrum of the signal photon.
    #[command(name = "as")]
    AngularSpectrum {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        map: MapArgs,
    },
    /// Conditional angular spectrum at a fixed idler.
    Cas {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        map: MapArgs,
        /// Condition on the maximum of a freshly computed angular spectrum.
        #[arg(long)]
        auto_idler: bool,
    },
    /// OAM-resolved transition-amplitude matrix and marginals.
    Oam {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Cartesian-product parameter sweep; one artifact set per point.
    Sweep {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        map: MapArgs,
    },
    /// Run the built-in validation suite (nonzero exit on failure).
    Validate {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
    },
}

fn main() -> ExitCode {
    spdc::quad::configure_workers();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            // Configuration and input problems are usage errors.
            match err {
                spdc::SpdcError::ConfigParse { .. } | spdc::SpdcError::InvalidInput { .. } => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}

fn print_summary(summary: &spdc::formats::RunSummary) {
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for (k, v) in &summary.scalars {
        println!("{k} = {v}");
    }
    for a in &summary.artifacts {
        println!("wrote {a}");
    }
}

fn run(cli: Cli) -> spdc::Result<ExitCode> {
    match cli.command {
        Command::Indices { io } => {
            let config = cli::load_config(&io.config)?;
            let summary = cli::run_indices(&config, &io.out)?;
            print_summary(&summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::AngularSpectrum { io, map } => {
            let config = cli::load_config(&io.config)?;
            let summary = cli::run_as(&config, &io.out, map.kind(), map.scale())?;
            print_summary(&summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Cas {
            io,
            map,
            auto_idler,
        } => {
            let config = cli::load_config(&io.config)?;
            let summary = cli::run_cas(&config, &io.out, map.kind(), map.scale(), auto_idler)?;
            print_summary(&summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Oam { io } => {
            let config = cli::load_config(&io.config)?;
            let summary = cli::run_oam(&config, &io.out)?;
            print_summary(&summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { io, map } => {
            let config = cli::load_config(&io.config)?;
            let summaries = cli::run_sweep(&config, &io.out, map.kind(), map.scale())?;
            for s in &summaries {
                print_summary(s);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { criteria } => {
            let filter = if criteria.is_empty() {
                None
            } else {
                Some(criteria.as_slice())
            };
            let reports = validate::run_all(filter);
            let failed = reports.iter().filter(|r| !r.passed).count();
            if failed == 0 {
                println!("all {} criteria passed", reports.len());
                Ok(ExitCode::SUCCESS)
            } else {
                println!("{failed} of {} criteria failed", reports.len());
                Ok(ExitCode::from(1))
            }
        }
    }
}
