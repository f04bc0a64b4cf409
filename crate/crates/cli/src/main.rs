// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod output;

/// Bohmian trajectories and operational speeds in a pair of coupled waveguides.
#[derive(Debug, Parser)]
#[command(name = "bohmflux", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transverse double-well modes on the finite-difference grid.
    Modes(ModesArgs),
    /// Stationary field, density and guidance velocity on an (x, y) grid.
    Field(FieldArgs),
    /// Closed-form trajectory of the evanescent wave packet.
    Packet(PacketArgs),
    /// Born-seeded trajectory ensemble in the stationary field.
    Trajectories(TrajectoriesArgs),
    /// Operational speed versus kinetic energy offset.
    SpeedCurve(SpeedCurveArgs),
    /// Run the oracle validation suite; exit 1 on any failed tolerance.
    Validate(ValidateArgs),
    /// Propagative and evanescent ensembles with density backgrounds.
    Figure1(Figure1Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Shape {
    Rectangular,
    Parabolic,
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// JSON configuration document; calibrated defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Guide cross-section.
    #[arg(long, value_enum, default_value_t = Shape::Rectangular)]
    shape: Shape,
}

#[derive(Debug, Args, Serialize)]
struct ModesArgs {
    #[command(flatten)]
    common: Common,
    /// Grid points across the transverse domain.
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct Offset {
    /// Kinetic energy offset in natural units; defaults to the configured one.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "delta_over_j0")]
    delta: Option<f64>,
    /// Kinetic energy offset in units of J0.
    #[arg(long = "delta-over-j0", allow_hyphen_values = true)]
    delta_over_j0: Option<f64>,
    /// Drop the radiative loss (Gamma = 0).
    #[arg(long)]
    lossless: bool,
}

#[derive(Debug, Args, Serialize)]
struct FieldArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    offset: Offset,
    /// Grid points along x and y.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"], default_values_t = [101, 101])]
    grid: Vec<usize>,
    /// Longitudinal extent in units of the field length scale min(1/|k1|, 1/|k2|).
    #[arg(long, default_value_t = 3.0)]
    x_extent: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct PacketArgs {
    #[command(flatten)]
    common: Common,
    /// Position at the start of the time span, in natural units.
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    /// Time span in units of 1/sigma (natural units with --natural-time).
    #[arg(long, num_args = 2, value_names = ["T0", "T1"], allow_hyphen_values = true, default_values_t = [-2.0, 2.0])]
    tspan: Vec<f64>,
    #[arg(long)]
    natural_time: bool,
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct TrajectoriesArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    offset: Offset,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fixed RK4 step; chosen from the field speed when omitted.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Also write the |Psi|^2 background on an NX x NY grid.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    background_grid: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SpeedCurveArgs {
    #[command(flatten)]
    common: Common,
    /// Offsets in units of J0 as start:stop:step, e.g. -1.5:-20:0.5.
    #[arg(long, allow_hyphen_values = true, default_value = "-1.5:-20:0.5")]
    deltas: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ValidateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["all", "eigen", "velocity", "continuity", "tdse"], default_value = "all")]
    suite: String,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct Figure1Args {
    #[command(flatten)]
    common: Common,
    /// Trajectories per panel.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"], default_values_t = [201, 161])]
    grid: Vec<usize>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

/// Bad input from the caller rather than a failed computation; exits with 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("BOHMFLUX_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| UsageError(format!("BOHMFLUX_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Modes(a) => commands::modes(a),
        Command::Field(a) => commands::field(a),
        Command::Packet(a) => commands::packet(a),
        Command::Trajectories(a) => commands::trajectories(a),
        Command::SpeedCurve(a) => commands::speed_curve(a),
        Command::Validate(a) => commands::validate(a),
        Command::Figure1(a) => commands::figure1(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
