//! Topology-constrained analysis of multi-class 3D segmentations.
//!
//! Containment ("LV is enclosed by Myo") and exclusion ("RA never touches
//! AO") relations between label classes are reduced to forbidden adjacencies
//! between two label sets. Dilating each set and intersecting with the other
//! yields the key voxels: every voxel taking part in a forbidden adjacency.
//! The crate provides
//!
//! * [`constraints`]: the constraint model, its text format and key-voxel
//!   detection, plus a brute-force reference;
//! * [`loss`]: cross-entropy, soft Dice and the key-voxel cross-entropy with
//!   analytic gradients, combined as `l_ce + l_dice + λ·l_tp`;
//! * [`metrics`]: Dice, Jaccard, surface distance and Hausdorff distance;
//! * [`morph`]: 3D dilation, boundaries and an exact distance transform;
//! * [`io`] and [`synth`]: the TGVOL1 container, a NIfTI-1 reader and
//!   deterministic phantoms.

pub mod bridge;
pub mod constraints;
pub mod error;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod morph;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod rng;
pub mod synth;
pub mod volume;

pub use constraints::{
    brute_force_key_voxels, key_voxels, reduce_to_xy, validate, Constraint, ConstraintKind,
    ConstraintSpec, ViolationReport, XYPair,
};
pub use error::{Error, Result};
pub use loss::{
    ce_loss, dice_loss, score_gradient, total_loss, tp_loss, GradVolume, LossBreakdown,
    LossConfig, MaskSource, TpNorm, DEFAULT_LAMBDA,
};
pub use metrics::{MetricReport, MetricOptions};
pub use morph::{boundary, dilate, edt, Connectivity, DistanceField};
pub use synth::{generate, soften, PhantomKind, PhantomSpec};
pub use volume::{
    argmax_labels, class_mask, BinaryMask, Dims, KeyVoxelMask, LabelId, LabelTable, LabelVolume,
    ProbVolume, Spacing,
};

/// Library version, shared by the CLI and any bindings.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
