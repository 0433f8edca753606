//! Flat-buffer entry points for host-language bindings.
//!
//! Arrays cross the boundary as plain slices plus a shape; constraint specs
//! cross as text and are parsed per call. Nothing here mutates its inputs.

use crate::constraints::{key_voxels, ConstraintSpec};
use crate::error::{Error, Result};
use crate::loss::{score_gradient, total_loss_with, LossBreakdown, LossConfig};
use crate::metrics::{report, MetricReport};
use crate::volume::{Dims, LabelTable, LabelVolume, ProbVolume, Spacing};

/// Where returned gradients live.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GradientLevel {
    /// With respect to the likelihoods.
    #[default]
    Likelihood,
    /// With respect to pre-normalization scores.
    Score,
}

fn dims3(shape: &[usize]) -> Result<Dims> {
    match *shape {
        [d, h, w] => Dims::new(d, h, w),
        _ => Err(Error::InvalidArgument(format!(
            "expected a 3-dimensional shape, got {shape:?}"
        ))),
    }
}

/// Key-voxel mask of a `(depth, height, width)` label array, as 0/1 bytes.
pub fn key_voxels_raw(labels: &[u8], shape: &[usize], spec_text: &str) -> Result<Vec<u8>> {
    let dims = dims3(shape)?;
    let spec = ConstraintSpec::parse(spec_text)?;
    let vol = LabelVolume::new(dims, Spacing::default(), spec.table().len(), labels.to_vec())?;
    Ok(key_voxels(&vol, &spec)?
        .data()
        .iter()
        .map(|&b| b as u8)
        .collect())
}

/// Total loss of a `(channels, depth, height, width)` likelihood array.
pub fn total_loss_raw(
    probs: &[f64],
    labels: &[u8],
    shape: &[usize],
    spec_text: &str,
    cfg: &LossConfig,
    level: GradientLevel,
) -> Result<(LossBreakdown, Vec<f64>)> {
    let (channels, dims) = match *shape {
        [c, d, h, w] => (c, Dims::new(d, h, w)?),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "expected a 4-dimensional (C, D, H, W) shape, got {shape:?}"
            )))
        }
    };
    let spec = ConstraintSpec::parse(spec_text)?;
    let p = ProbVolume::with_check(dims, Spacing::default(), channels, probs.to_vec(), cfg.check_normalization)?;
    let g = LabelVolume::new(dims, Spacing::default(), channels, labels.to_vec())?;
    let (breakdown, grad) = total_loss_with(&p, &g, &spec, cfg)?;
    let grad = match level {
        GradientLevel::Likelihood => grad,
        GradientLevel::Score => score_gradient(&grad, &p)?,
    };
    Ok((breakdown, grad.into_data()))
}

/// Metric report of two `(depth, height, width)` label arrays.
pub fn metrics_raw(
    pred: &[u8],
    gt: &[u8],
    shape: &[usize],
    spacing: [f64; 3],
    table: &LabelTable,
) -> Result<MetricReport> {
    let dims = dims3(shape)?;
    let spacing = Spacing::new(spacing[0], spacing[1], spacing[2])?;
    let p = LabelVolume::new(dims, spacing, table.len(), pred.to_vec())?;
    let g = LabelVolume::new(dims, spacing, table.len(), gt.to_vec())?;
    report(&p, &g, table)
}
