use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wrn_core::config::OutputFormat;
use wrn_core::flow::{LengthModel, VerifyMode};
use wrn_core::satcomp::SatLabel;
use wrn_core::LatticeFamily;

mod commands;
mod output;

/// Weakly-regular quantum network lattices: build, analyse, verify, sweep.
#[derive(Debug, Parser)]
#[command(name = "wrn", version)]
struct Cli {
    /// TOML or JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for randomised commands. Overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for trials and sweeps. Defaults to all cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Honeycomb,
    Hexagonal,
    Manhattan8,
    Manhattan16,
}

impl From<FamilyArg> for LatticeFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Honeycomb => LatticeFamily::Honeycomb,
            FamilyArg::Hexagonal => LatticeFamily::Hexagonal,
            FamilyArg::Manhattan8 => LatticeFamily::Manhattan8,
            FamilyArg::Manhattan16 => LatticeFamily::Manhattan16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    DownNight,
    DownDay,
    UpNight,
    UpDay,
}

impl From<PresetArg> for SatLabel {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::DownNight => SatLabel::DownNight,
            PresetArg::DownDay => SatLabel::DownDay,
            PresetArg::UpNight => SatLabel::UpNight,
            PresetArg::UpDay => SatLabel::UpDay,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Bounds,
    Equality,
}

impl From<ModeArg> for VerifyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bounds => VerifyMode::Bounds,
            ModeArg::Equality => VerifyMode::Equality,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LengthsArg {
    Target,
    Consistent,
}

impl From<LengthsArg> for LengthModel {
    fn from(l: LengthsArg) -> Self {
        match l {
            LengthsArg::Target => LengthModel::Target,
            LengthsArg::Consistent => LengthModel::Consistent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CapacityArg {
    /// Every edge carries 1.
    Unit,
    /// Stored capacities only.
    Explicit,
    /// Stored capacity, else the PLOB bound of the edge length.
    Plob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output file. Defaults to the config's `output`, then stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a lattice and write it as graph JSON.
    Build {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, short, value_parser = clap::value_parser!(u64).range(1..))]
        rings: u64,
        /// Length of the longest edge class, km.
        #[arg(long, default_value_t = 1.0)]
        edge_scale: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Commonality, cut and capacity report for a graph JSON file.
    Analyze {
        graph: PathBuf,
        /// Users as `a,b`. Defaults to a deeply-embedded pair.
        #[arg(long, value_parser = parse_users)]
        users: Option<(usize, usize)>,
        /// Family used to pick default users. Inferred from internal degrees
        /// when absent.
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long, value_enum, default_value_t = CapacityArg::Plob)]
        capacity: CapacityArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Randomised check of the flooding-capacity threshold results.
    Verify {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, short, value_parser = clap::value_parser!(u64).range(1..))]
        rings: u64,
        /// Capacity target, bits per use.
        #[arg(long, default_value_t = 1.0)]
        target: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Bounds)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, value_enum, default_value_t = LengthsArg::Target)]
        lengths: LengthsArg,
        /// Stretch one bulk link to this multiple of d_max.
        #[arg(long)]
        stretch: Option<f64>,
        /// Where to save the first failing network. Defaults to
        /// `<out>.counterexample.json` when `--out` is given.
        #[arg(long)]
        counterexample: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Maximum link length and minimum density against capacity target.
    SweepFig2 {
        #[arg(long, default_value_t = 1e-2)]
        lo: f64,
        #[arg(long, default_value_t = 1e1)]
        hi: f64,
        #[arg(long, default_value_t = 61)]
        samples: usize,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Daily-rate advantage over a satellite against link length and density.
    SweepFig3 {
        #[arg(long, value_enum, default_value_t = PresetArg::DownNight)]
        preset: PresetArg,
        /// Link-length range, km.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [10.0, 600.0])]
        d_range: Vec<f64>,
        /// Density range, nodes per km².
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [1e-6, 1e-3])]
        rho_range: Vec<f64>,
        #[arg(long, default_value_t = 60)]
        samples: usize,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Transit time that makes a repeater chain break even at `d_star`.
    Calibrate {
        #[arg(long, value_enum, default_value_t = PresetArg::DownNight)]
        preset: PresetArg,
        /// Break-even chain separation, km. Defaults to the config value.
        #[arg(long)]
        d_star: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn parse_users(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
