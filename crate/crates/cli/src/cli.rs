use std::path::PathBuf;

use clap::{ArgGroup, Parser, Subcommand};
use protodesign::designer::Preset;

use crate::commands::{cmd_analyze, cmd_compare, cmd_design, cmd_simulate, SimMode};
use crate::failure::{CliResult, Failure, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "protodesign", version, about = "FBMC prototype filter design and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a design problem and write a filter file.
    #[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
    Design {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Figures of merit of one filter (file or builtin key).
    Analyze {
        #[arg(long)]
        filter: String,
        #[arg(long)]
        out: PathBuf,
        /// DFT grid size for spectral metrics.
        #[arg(long)]
        grid: Option<usize>,
        /// Also write the peak-normalized power spectrum here.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Figures of merit of several filters, one CSV row each.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        filters: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Emit the OoB energy curve over ω/2π ∈ [0, 0.25] instead.
        #[arg(long)]
        oob_sweep: bool,
    },
    /// Transmultiplexer loopback: empirical SIR or BER.
    Simulate {
        #[arg(long)]
        filter: String,
        #[arg(long, value_enum)]
        mode: SimMode,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    Preset::parse(s).ok_or_else(|| format!("unknown preset {s:?} (type1, type2, type3)"))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Design { config, preset, out } => cmd_design(config.as_deref(), *preset, out),
        Command::Analyze { filter, out, grid, spectrum } => cmd_analyze(filter, out, *grid, spectrum.as_deref()),
        Command::Compare { filters, out, oob_sweep } => cmd_compare(filters, out, *oob_sweep),
        Command::Simulate { filter, mode, scenario, out, seed } => cmd_simulate(filter, *mode, scenario, out, *seed),
    }
}

/// Runs the command and reports failures on standard error.
pub fn run_to_exit_code(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure { code, error }) => {
            log::error!("{error:#}");
            code
        }
    }
}
