//! `topoguard` command-line front end.
//!
//! Exit codes: 0 success, 1 topology violations (`validate` only),
//! 2 usage error, 3 I/O or format error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "topoguard", version, about = "Topology constraints for multi-class 3D segmentations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report constraint violations; exits 1 when any are found.
    Validate {
        seg: PathBuf,
        /// Constraint file; the WHS defaults apply when omitted.
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write the key-voxel mask as a TGVOL1 mask volume.
    Keymask {
        seg: PathBuf,
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the loss breakdown as one JSON line.
    Loss {
        prob: PathBuf,
        gt: PathBuf,
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[arg(long, default_value_t = topoguard::DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = TpNormArg::Keyvox)]
        tp_norm: TpNormArg,
        /// Segmentation the key voxels are taken from.
        #[arg(long, value_enum, default_value_t = MaskSourceArg::Pred)]
        mask_source: MaskSourceArg,
        /// Average Dice over foreground classes only.
        #[arg(long)]
        dice_foreground_only: bool,
    },
    /// Per-class and generalized overlap and surface metrics as CSV.
    Metrics {
        pred: PathBuf,
        gt: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Report the 95th percentile instead of the maximum surface distance.
        #[arg(long)]
        hd95: bool,
    },
    /// Generate a synthetic phantom.
    Synth(SynthArgs),
}

#[derive(clap::Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// `D,H,W`, or a single extent for a cube.
    #[arg(long, value_parser = parse_dims, default_value = "32")]
    dims: [usize; 3],
    /// `dz,dy,dx` in mm, or a single isotropic value.
    #[arg(long, value_parser = parse_spacing, default_value = "1")]
    spacing: [f64; 3],
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inner (LV) radius in voxels.
    #[arg(long, default_value_t = 6.0)]
    r1: f64,
    /// Outer (Myo) radius in voxels.
    #[arg(long, default_value_t = 10.0)]
    r2: f64,
    #[arg(long, default_value_t = 4.0)]
    blob_radius: f64,
    /// Blob center distance in voxels.
    #[arg(long, default_value_t = 12)]
    separation: usize,
    /// Tunnel cross-section side in voxels.
    #[arg(long, default_value_t = 1)]
    channel_width: usize,
    /// Label count for random volumes.
    #[arg(long, default_value_t = 8)]
    classes: usize,
    /// Emit a likelihood map softened at this temperature instead of labels.
    #[arg(long)]
    soften: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    JsonLines,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TpNormArg {
    Keyvox,
    Allvox,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MaskSourceArg {
    Pred,
    Gt,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    NestedSpheres,
    SeparatedBlobs,
    PunchedShell,
    Random,
}

fn triple<T: std::str::FromStr + Copy>(s: &str) -> Result<[T; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |p: &str| p.parse::<T>().map_err(|_| format!("invalid value `{p}`"));
    match parts.as_slice() {
        [one] => Ok([parse(one)?; 3]),
        [a, b, c] => Ok([parse(a)?, parse(b)?, parse(c)?]),
        _ => Err("expected one value or three comma-separated values".into()),
    }
}

fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let d = triple::<usize>(s)?;
    if d.contains(&0) {
        return Err("extents must be positive".into());
    }
    Ok(d)
}

fn parse_spacing(s: &str) -> Result<[f64; 3], String> {
    let sp = triple::<f64>(s)?;
    if sp.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err("spacing must be positive and finite".into());
    }
    Ok(sp)
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("TOPOGUARD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("TOPOGUARD_THREADS must be a non-negative integer, got `{raw}`"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
