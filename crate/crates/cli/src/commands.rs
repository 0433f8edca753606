use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;
use topoguard::io::{load_labels, load_probs, write_volume, MaskVolume, Volume};
use topoguard::loss::total_loss_with;
use topoguard::metrics::{report_with, HausdorffMode};
use topoguard::synth::{generate, soften, PhantomKind, PhantomSpec};
use topoguard::{
    key_voxels, validate, ConstraintSpec, Dims, LabelTable, LossConfig, MaskSource, MetricOptions,
    Spacing, TpNorm,
};

use crate::{Command, Format, KindArg, MaskSourceArg, SynthArgs, TpNormArg};

/// Bad flag values detected after parsing; reported with exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        2
    } else {
        3
    }
}

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Validate {
            seg,
            constraints,
            format,
        } => cmd_validate(&seg, constraints.as_deref(), format),
        Command::Keymask {
            seg,
            constraints,
            output,
        } => cmd_keymask(&seg, constraints.as_deref(), &output),
        Command::Loss {
            prob,
            gt,
            constraints,
            lambda,
            tp_norm,
            mask_source,
            dice_foreground_only,
        } => {
            if !(lambda.is_finite() && lambda >= 0.0) {
                return Err(Usage(format!("--lambda must be finite and non-negative, got {lambda}")).into());
            }
            let cfg = LossConfig {
                lambda,
                tp_norm: match tp_norm {
                    TpNormArg::Keyvox => TpNorm::Keyvox,
                    TpNormArg::Allvox => TpNorm::Allvox,
                },
                mask_source: match mask_source {
                    MaskSourceArg::Pred => MaskSource::Prediction,
                    MaskSourceArg::Gt => MaskSource::GroundTruth,
                },
                dice_foreground_only,
                ..LossConfig::default()
            };
            cmd_loss(&prob, &gt, constraints.as_deref(), &cfg)
        }
        Command::Metrics { pred, gt, csv, hd95 } => cmd_metrics(&pred, &gt, csv.as_deref(), hd95),
        Command::Synth(args) => cmd_synth(&args),
    }
}

fn load_spec(path: Option<&Path>) -> Result<ConstraintSpec> {
    let Some(path) = path else {
        return Ok(ConstraintSpec::whs());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading constraints {}", path.display()))?;
    ConstraintSpec::parse(&text).with_context(|| format!("parsing constraints {}", path.display()))
}

fn labels(path: &Path) -> Result<topoguard::LabelVolume> {
    load_labels(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_validate(seg: &Path, constraints: Option<&Path>, format: Format) -> Result<u8> {
    let spec = load_spec(constraints)?;
    let g = labels(seg)?;
    let report = validate(&g, &spec)?;
    let mut out = std::io::stdout().lock();
    match format {
        Format::Text => writeln!(out, "{report}")?,
        Format::JsonLines => {
            for c in &report.per_constraint {
                writeln!(out, "{}", serde_json::to_string(c)?)?;
            }
            let s = report.spacing;
            let summary = json!({
                "total": report.total,
                "dims": report.dims.as_array(),
                "spacing": [s.dz, s.dy, s.dx],
                "valid": report.is_valid(),
            });
            writeln!(out, "{summary}")?;
        }
    }
    Ok(if report.is_valid() { 0 } else { 1 })
}

fn cmd_keymask(seg: &Path, constraints: Option<&Path>, output: &Path) -> Result<u8> {
    let spec = load_spec(constraints)?;
    let g = labels(seg)?;
    let mask = key_voxels(&g, &spec)?;
    let volume = Volume::Mask(MaskVolume {
        mask,
        spacing: g.spacing(),
    });
    write_volume(output, &volume).with_context(|| format!("writing {}", output.display()))?;
    Ok(0)
}

fn cmd_loss(prob: &Path, gt: &Path, constraints: Option<&Path>, cfg: &LossConfig) -> Result<u8> {
    let spec = load_spec(constraints)?;
    let p = load_probs(prob).with_context(|| format!("reading {}", prob.display()))?;
    let g = labels(gt)?;
    let (breakdown, _) = total_loss_with(&p, &g, &spec, cfg)?;
    println!("{}", serde_json::to_string(&breakdown)?);
    Ok(0)
}

/// WHS names for up to eight classes, generic names beyond.
fn table_for(num_classes: usize) -> Result<LabelTable> {
    let whs = LabelTable::whs();
    let names: Vec<String> = (0..num_classes.max(1))
        .map(|i| match whs.name(i as u8) {
            Some(n) if num_classes <= whs.len() => n.to_string(),
            _ if i == 0 => "BG".to_string(),
            _ => format!("L{i}"),
        })
        .collect();
    Ok(LabelTable::new(names)?)
}

fn cmd_metrics(pred: &Path, gt: &Path, csv: Option<&Path>, hd95: bool) -> Result<u8> {
    let p = labels(pred)?;
    let g = labels(gt)?;
    let table = table_for(p.num_classes().max(g.num_classes()))?;
    let opts = MetricOptions {
        hausdorff: if hd95 {
            HausdorffMode::Percentile95
        } else {
            HausdorffMode::Max
        },
    };
    let text = report_with(&p, &g, &table, opts)?.to_csv();
    match csv {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_synth(args: &SynthArgs) -> Result<u8> {
    let usage = |e: topoguard::Error| anyhow::Error::from(Usage(e.to_string()));
    let [d, h, w] = args.dims;
    let [dz, dy, dx] = args.spacing;
    let kind = match args.kind {
        KindArg::NestedSpheres => PhantomKind::NestedSpheres,
        KindArg::SeparatedBlobs => PhantomKind::SeparatedBlobs,
        KindArg::PunchedShell => PhantomKind::PunchedShell,
        KindArg::Random => PhantomKind::Random,
    };
    let mut spec = PhantomSpec::new(kind, Dims::new(d, h, w).map_err(usage)?);
    spec.spacing = Spacing::new(dz, dy, dx).map_err(usage)?;
    spec.seed = args.seed;
    spec.inner_radius = args.r1;
    spec.outer_radius = args.r2;
    spec.blob_radius = args.blob_radius;
    spec.separation = args.separation;
    spec.channel_width = args.channel_width;
    spec.num_classes = args.classes;
    let labels = generate(&spec).map_err(usage)?;
    let volume = match args.soften {
        Some(t) => Volume::Probs(soften(&labels, t, args.seed).map_err(usage)?),
        None => Volume::Labels(labels),
    };
    write_volume(&args.output, &volume)
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(0)
}
