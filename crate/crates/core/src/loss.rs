//! Cross-entropy, soft Dice, the key-voxel restricted cross-entropy, and
//! their weighted total, each with analytic gradients.
//!
//! Gradients are taken with respect to the likelihoods `p`; use
//! [`score_gradient`] to pull them back through the per-voxel normalized
//! exponential to pre-normalization scores.

use serde::Serialize;

use crate::constraints::{key_voxels, ConstraintSpec};
use crate::error::{Error, Result};
use crate::volume::{
    argmax_labels, ensure_same_grid, BinaryMask, Dims, KeyVoxelMask, LabelVolume, ProbVolume,
    NORMALIZATION_TOLERANCE,
};

/// Weight of the topology term in the total loss.
pub const DEFAULT_LAMBDA: f64 = 1e-6;
/// Lower clamp applied to likelihoods before the logarithm.
pub const CE_EPSILON: f64 = 1e-7;
/// Additive smoothing in numerator and denominator of each soft Dice ratio.
pub const DICE_SMOOTHING: f64 = 1e-5;

/// Partial derivatives of a scalar loss, laid out like a [`ProbVolume`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradVolume {
    dims: Dims,
    channels: usize,
    data: Vec<f64>,
}

impl GradVolume {
    pub fn zeros(dims: Dims, channels: usize) -> Self {
        Self {
            dims,
            channels,
            data: vec![0.0; dims.len() * channels],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, channel: usize, voxel: usize) -> f64 {
        self.data[channel * self.dims.len() + voxel]
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &GradVolume, scale: f64) {
        assert_eq!(self.data.len(), other.data.len(), "gradient shapes differ");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Voxels with a nonzero entry in any channel.
    pub fn support(&self) -> BinaryMask {
        let n = self.dims.len();
        let data = (0..n)
            .map(|v| (0..self.channels).any(|c| self.data[c * n + v] != 0.0))
            .collect();
        BinaryMask::new(self.dims, data).expect("same grid")
    }
}

/// Normalization of the masked cross-entropy inside the topology term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TpNorm {
    /// Mean over key voxels.
    #[default]
    Keyvox,
    /// Sum over key voxels divided by the total voxel count.
    Allvox,
}

/// Which segmentation the key-voxel mask is computed from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskSource {
    /// Argmax of the predicted likelihoods.
    #[default]
    Prediction,
    GroundTruth,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    pub lambda: f64,
    pub tp_norm: TpNorm,
    pub mask_source: MaskSource,
    pub dice_foreground_only: bool,
    pub check_normalization: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            tp_norm: TpNorm::Keyvox,
            mask_source: MaskSource::Prediction,
            dice_foreground_only: false,
            check_normalization: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub l_ce: f64,
    pub l_dice: f64,
    pub l_tp: f64,
    pub lambda: f64,
    pub l_total: f64,
    pub key_voxel_count: usize,
}

fn check_pair(p: &ProbVolume, g: &LabelVolume) -> Result<()> {
    ensure_same_grid(p.dims(), g.dims())?;
    if let Some(&bad) = g.data().iter().find(|&&l| l as usize >= p.channels()) {
        return Err(Error::UnknownLabel(bad as u32));
    }
    Ok(())
}

/// Sum of `-ln p[g(v)](v)` over the included voxels divided by `denom`.
fn masked_ce(
    p: &ProbVolume,
    g: &LabelVolume,
    mask: Option<&BinaryMask>,
    denom: Option<usize>,
) -> Result<(f64, GradVolume)> {
    check_pair(p, g)?;
    if let Some(m) = mask {
        ensure_same_grid(p.dims(), m.dims())?;
    }
    let dims = p.dims();
    let n = dims.len();
    let included = |v: usize| mask.is_none_or(|m| m.data()[v]);
    let count = mask.map_or(n, BinaryMask::count);
    let mut grad = GradVolume::zeros(dims, p.channels());
    if count == 0 {
        return Ok((0.0, grad));
    }
    let m = denom.unwrap_or(count) as f64;
    let mut sum = 0.0;
    for (v, &label) in g.data().iter().enumerate() {
        if !included(v) {
            continue;
        }
        let idx = label as usize * n + v;
        let prob = p.data()[idx].clamp(CE_EPSILON, 1.0);
        sum -= prob.ln();
        grad.data[idx] = -1.0 / (m * prob);
    }
    Ok((sum / m, grad))
}

/// Mean cross-entropy over all voxels, or over the true voxels of `mask`.
///
/// An empty mask yields a zero loss and a zero gradient.
pub fn ce_loss(p: &ProbVolume, g: &LabelVolume, mask: Option<&BinaryMask>) -> Result<(f64, GradVolume)> {
    p.check_normalized(NORMALIZATION_TOLERANCE)?;
    masked_ce(p, g, mask, None)
}

/// Soft Dice loss averaged over every class, background included.
pub fn dice_loss(p: &ProbVolume, g: &LabelVolume) -> Result<(f64, GradVolume)> {
    dice_loss_with(p, g, false)
}

pub fn dice_loss_with(p: &ProbVolume, g: &LabelVolume, foreground_only: bool) -> Result<(f64, GradVolume)> {
    check_pair(p, g)?;
    let n = p.dims().len();
    let first = usize::from(foreground_only);
    let classes = first..p.channels();
    if classes.is_empty() {
        return Err(Error::InvalidArgument(
            "foreground-only Dice needs at least two channels".into(),
        ));
    }
    let k = classes.len() as f64;
    let s = DICE_SMOOTHING;
    let mut grad = GradVolume::zeros(p.dims(), p.channels());
    let mut dice_sum = 0.0;
    for c in classes {
        let pc = p.channel(c);
        let mut inter = 0.0;
        let mut psum = 0.0;
        let mut gsum = 0.0;
        for (&prob, &label) in pc.iter().zip(g.data()) {
            psum += prob;
            if label as usize == c {
                inter += prob;
                gsum += 1.0;
            }
        }
        let num = 2.0 * inter + s;
        let den = psum + gsum + s;
        dice_sum += num / den;
        let out = &mut grad.data[c * n..(c + 1) * n];
        for (o, &label) in out.iter_mut().zip(g.data()) {
            let hit = if label as usize == c { 2.0 } else { 0.0 };
            *o = -(hit * den - num) / (den * den * k);
        }
    }
    Ok((1.0 - dice_sum / k, grad))
}

/// Topology term: cross-entropy restricted to the key voxels.
#[derive(Clone, Debug, PartialEq)]
pub struct TpLoss {
    pub value: f64,
    pub grad: GradVolume,
    pub mask: KeyVoxelMask,
}

pub fn tp_loss(p: &ProbVolume, g: &LabelVolume, spec: &ConstraintSpec) -> Result<TpLoss> {
    tp_loss_with(p, g, spec, &LossConfig::default())
}

/// Key-voxel mask the topology term uses under `cfg`.
pub fn key_mask_for(
    p: &ProbVolume,
    g: &LabelVolume,
    spec: &ConstraintSpec,
    cfg: &LossConfig,
) -> Result<KeyVoxelMask> {
    match cfg.mask_source {
        MaskSource::Prediction => key_voxels(&argmax_labels(p), spec),
        MaskSource::GroundTruth => key_voxels(g, spec),
    }
}

pub fn tp_loss_with(
    p: &ProbVolume,
    g: &LabelVolume,
    spec: &ConstraintSpec,
    cfg: &LossConfig,
) -> Result<TpLoss> {
    check_pair(p, g)?;
    if cfg.check_normalization {
        p.check_normalized(NORMALIZATION_TOLERANCE)?;
    }
    let mask = key_mask_for(p, g, spec, cfg)?;
    let (value, grad) = tp_loss_masked(p, g, &mask, cfg.tp_norm)?;
    Ok(TpLoss { value, grad, mask })
}

/// Topology term for an already computed (frozen) key-voxel mask.
pub fn tp_loss_masked(
    p: &ProbVolume,
    g: &LabelVolume,
    mask: &BinaryMask,
    norm: TpNorm,
) -> Result<(f64, GradVolume)> {
    let denom = match norm {
        TpNorm::Keyvox => None,
        TpNorm::Allvox => Some(p.dims().len()),
    };
    masked_ce(p, g, Some(mask), denom)
}

/// `l_ce + l_dice + lambda · l_tp` with the default configuration otherwise.
pub fn total_loss(
    p: &ProbVolume,
    g: &LabelVolume,
    spec: &ConstraintSpec,
    lambda: f64,
) -> Result<(LossBreakdown, GradVolume)> {
    let cfg = LossConfig {
        lambda,
        ..LossConfig::default()
    };
    total_loss_with(p, g, spec, &cfg)
}

pub fn total_loss_with(
    p: &ProbVolume,
    g: &LabelVolume,
    spec: &ConstraintSpec,
    cfg: &LossConfig,
) -> Result<(LossBreakdown, GradVolume)> {
    check_pair(p, g)?;
    let mask = key_mask_for(p, g, spec, cfg)?;
    total_loss_frozen(p, g, &mask, cfg)
}

/// Total loss with the key-voxel mask held fixed.
pub fn total_loss_frozen(
    p: &ProbVolume,
    g: &LabelVolume,
    mask: &BinaryMask,
    cfg: &LossConfig,
) -> Result<(LossBreakdown, GradVolume)> {
    if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and non-negative, got {}",
            cfg.lambda
        )));
    }
    if cfg.check_normalization {
        p.check_normalized(NORMALIZATION_TOLERANCE)?;
    }
    let (l_ce, mut grad) = masked_ce(p, g, None, None)?;
    let (l_dice, g_dice) = dice_loss_with(p, g, cfg.dice_foreground_only)?;
    let (l_tp, g_tp) = tp_loss_masked(p, g, mask, cfg.tp_norm)?;
    grad.add_scaled(&g_dice, 1.0);
    grad.add_scaled(&g_tp, cfg.lambda);
    let breakdown = LossBreakdown {
        l_ce,
        l_dice,
        l_tp,
        lambda: cfg.lambda,
        l_total: l_ce + l_dice + cfg.lambda * l_tp,
        key_voxel_count: mask.count(),
    };
    Ok((breakdown, grad))
}

/// Chain rule through the per-voxel normalized exponential:
/// `out_c = p_c · (in_c − Σ_k in_k · p_k)`.
pub fn score_gradient(p_grad: &GradVolume, p: &ProbVolume) -> Result<GradVolume> {
    ensure_same_grid(p_grad.dims(), p.dims())?;
    if p_grad.channels() != p.channels() {
        return Err(Error::ChannelMismatch {
            left: p_grad.channels(),
            right: p.channels(),
        });
    }
    let n = p.dims().len();
    let ch = p.channels();
    let mut out = GradVolume::zeros(p.dims(), ch);
    for v in 0..n {
        let dot: f64 = (0..ch).map(|c| p_grad.data[c * n + v] * p.get(c, v)).sum();
        for c in 0..ch {
            let i = c * n + v;
            out.data[i] = p.data()[i] * (p_grad.data[i] - dot);
        }
    }
    Ok(out)
}
