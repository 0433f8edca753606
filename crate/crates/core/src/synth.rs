//! Deterministic synthetic phantoms with known topology.
//!
//! Spheres are rasterized by testing whether each voxel center lies within
//! the radius of a center placed on the voxel `(d/2, h/2, w/2)`.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::volume::{Dims, LabelId, LabelVolume, ProbVolume, Spacing, WHS_LABELS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhantomKind {
    /// LV ball inside a Myo shell inside background.
    NestedSpheres,
    /// RA and AO balls separated along the width axis.
    SeparatedBlobs,
    /// Nested spheres with a straight tunnel through the shell.
    PunchedShell,
    /// Uniformly random labels.
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub dims: Dims,
    pub spacing: Spacing,
    pub seed: u64,
    /// LV radius in voxels.
    pub inner_radius: f64,
    /// Outer Myo radius in voxels.
    pub outer_radius: f64,
    /// Radius of each blob in voxels.
    pub blob_radius: f64,
    /// Center-to-center blob distance in voxels.
    pub separation: usize,
    /// Side of the square tunnel cross-section in voxels.
    pub channel_width: usize,
    /// Label count for [`PhantomKind::Random`].
    pub num_classes: usize,
}

impl PhantomSpec {
    pub fn new(kind: PhantomKind, dims: Dims) -> Self {
        Self {
            kind,
            dims,
            spacing: Spacing::isotropic(),
            seed: 0,
            inner_radius: 6.0,
            outer_radius: 10.0,
            blob_radius: 4.0,
            separation: 12,
            channel_width: 1,
            num_classes: WHS_LABELS.len(),
        }
    }
}

fn whs(name: &str) -> LabelId {
    WHS_LABELS.iter().position(|&n| n == name).expect("WHS label") as LabelId
}

fn center(dims: Dims) -> [usize; 3] {
    [dims.depth / 2, dims.height / 2, dims.width / 2]
}

/// Room around the center along each axis.
fn room(dims: Dims) -> f64 {
    let c = center(dims);
    dims.as_array()
        .iter()
        .zip(c)
        .map(|(&n, c)| c.min(n - 1 - c))
        .min()
        .expect("three axes") as f64
}

fn dist(a: [usize; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&p, q)| (p as f64 - q).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn check(spec: &PhantomSpec) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidPhantom(m));
    match spec.kind {
        PhantomKind::NestedSpheres | PhantomKind::PunchedShell => {
            let (r1, r2) = (spec.inner_radius, spec.outer_radius);
            if !(r1 > 0.0 && r2.is_finite()) {
                return bad(format!("radii must be positive, got {r1} and {r2}"));
            }
            // a shell thinner than the 26-neighborhood reach leaks
            if r2 - r1 < 3f64.sqrt() {
                return bad(format!("shell {r1}..{r2} is thinner than sqrt(3) voxels"));
            }
            if r2 > room(spec.dims) {
                return bad(format!("outer radius {r2} does not fit in {}", spec.dims));
            }
            if spec.kind == PhantomKind::PunchedShell {
                let c = center(spec.dims);
                let w = spec.channel_width;
                if w == 0 || c[0] + w > spec.dims.depth || c[1] + w > spec.dims.height {
                    return bad(format!("channel width {w} does not fit"));
                }
            }
        }
        PhantomKind::SeparatedBlobs => {
            let r = spec.blob_radius;
            if !(r >= 0.0 && r.is_finite()) || spec.separation == 0 {
                return bad("blob radius must be non-negative and separation positive".into());
            }
            let c = center(spec.dims);
            let left = c[2] as f64 - (spec.separation / 2) as f64;
            let right = left + spec.separation as f64;
            let d = spec.dims;
            let fits = left - r >= 0.0
                && right + r <= (d.width - 1) as f64
                && r <= c[0].min(d.depth - 1 - c[0]) as f64
                && r <= c[1].min(d.height - 1 - c[1]) as f64;
            if !fits {
                return bad(format!(
                    "blobs of radius {r} at separation {} do not fit in {d}",
                    spec.separation
                ));
            }
        }
        PhantomKind::Random => {
            if spec.num_classes == 0 || spec.num_classes > 256 {
                return bad(format!("invalid class count {}", spec.num_classes));
            }
        }
    }
    Ok(())
}

pub fn generate(spec: &PhantomSpec) -> Result<LabelVolume> {
    check(spec)?;
    let dims = spec.dims;
    let n = dims.len();
    let c = center(dims);
    let cf = c.map(|v| v as f64);
    let mut data = vec![0 as LabelId; n];
    let mut num_classes = WHS_LABELS.len();
    match spec.kind {
        PhantomKind::NestedSpheres | PhantomKind::PunchedShell => {
            let (lv, myo) = (whs("LV"), whs("Myo"));
            for (i, slot) in data.iter_mut().enumerate() {
                let r = dist(dims.coords(i), cf);
                if r <= spec.inner_radius {
                    *slot = lv;
                } else if r <= spec.outer_radius {
                    *slot = myo;
                }
            }
            if spec.kind == PhantomKind::PunchedShell {
                let w = spec.channel_width;
                for z in c[0]..c[0] + w {
                    for y in c[1]..c[1] + w {
                        for x in c[2]..dims.width {
                            let i = dims.index(z, y, x);
                            if data[i] == myo {
                                data[i] = 0;
                            }
                        }
                    }
                }
            }
        }
        PhantomKind::SeparatedBlobs => {
            let left = (c[2] - spec.separation / 2) as f64;
            let centers = [
                (whs("RA"), [cf[0], cf[1], left]),
                (whs("AO"), [cf[0], cf[1], left + spec.separation as f64]),
            ];
            for (i, slot) in data.iter_mut().enumerate() {
                let p = dims.coords(i);
                for (label, ctr) in centers {
                    if dist(p, ctr) <= spec.blob_radius {
                        *slot = label;
                    }
                }
            }
        }
        PhantomKind::Random => {
            num_classes = spec.num_classes;
            let mut rng = SplitMix64::new(spec.seed);
            for slot in &mut data {
                *slot = rng.below(num_classes as u64) as LabelId;
            }
        }
    }
    LabelVolume::new(dims, spec.spacing, num_classes, data)
}

/// Plausible likelihood map whose argmax is exactly `labels`.
///
/// Scores are `onehot / T + u · 0.5 / T` with `u` uniform in `[0, 1)` drawn
/// per voxel then per channel; the true channel always leads by more than
/// `0.5 / T`, so the argmax survives normalization.
pub fn soften(labels: &LabelVolume, temperature: f64, seed: u64) -> Result<ProbVolume> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    let n = labels.dims().len();
    let ch = labels.num_classes();
    let inv = 1.0 / temperature;
    let mut rng = SplitMix64::new(seed);
    let mut scores = vec![0.0; n * ch];
    for (v, &l) in labels.data().iter().enumerate() {
        for c in 0..ch {
            let hot = if c == l as usize { inv } else { 0.0 };
            scores[c * n + v] = hot + rng.next_f64() * 0.5 * inv;
        }
    }
    ProbVolume::from_scores(labels.dims(), labels.spacing(), ch, &scores)
}
