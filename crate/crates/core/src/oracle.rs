//! Brute-force reference implementations used by the verification suites.
//!
//! Everything here works by direct enumeration over neighbor offsets or
//! voxel pairs and shares no code path with the production kernels beyond
//! the volume types themselves.

use crate::morph::Connectivity;
use crate::volume::{BinaryMask, LabelVolume, ProbVolume, Spacing};

/// Dilation by scanning every neighbor offset of every voxel.
pub fn dilate(mask: &BinaryMask, conn: Connectivity) -> BinaryMask {
    let dims = mask.dims();
    let offsets = conn.offsets();
    let data = (0..dims.len())
        .map(|v| {
            mask.data()[v]
                || offsets.iter().any(|&o| {
                    dims.offset_index(dims.coords(v), o)
                        .is_some_and(|u| mask.data()[u])
                })
        })
        .collect();
    BinaryMask::new(dims, data).expect("same grid")
}

/// Face-connected boundary by scanning the six face offsets.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let dims = mask.dims();
    let offsets = Connectivity::Face6.offsets();
    let data = (0..dims.len())
        .map(|v| {
            mask.data()[v]
                && offsets.iter().any(|&o| {
                    dims.offset_index(dims.coords(v), o)
                        .is_none_or(|u| !mask.data()[u])
                })
        })
        .collect();
    BinaryMask::new(dims, data).expect("same grid")
}

fn physical(c: [usize; 3], spacing: Spacing) -> [f64; 3] {
    let s = spacing.as_array();
    [c[0] as f64 * s[0], c[1] as f64 * s[1], c[2] as f64 * s[2]]
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Distance from every voxel to the nearest true voxel, over all pairs.
pub fn edt(mask: &BinaryMask, spacing: Spacing) -> Vec<f64> {
    let dims = mask.dims();
    let sources: Vec<[f64; 3]> = mask
        .ones()
        .map(|i| physical(dims.coords(i), spacing))
        .collect();
    (0..dims.len())
        .map(|v| {
            let p = physical(dims.coords(v), spacing);
            sources
                .iter()
                .map(|&s| distance(p, s))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// `(sd, hd)` between the boundaries of two masks by all-pairs search;
/// `None` when either mask is empty.
pub fn surface_distances(a: &BinaryMask, b: &BinaryMask, spacing: Spacing) -> Option<(f64, f64)> {
    let dims = a.dims();
    let pts = |m: &BinaryMask| -> Vec<[f64; 3]> {
        boundary(m)
            .ones()
            .map(|i| physical(dims.coords(i), spacing))
            .collect()
    };
    let (sa, sb) = (pts(a), pts(b));
    if sa.is_empty() || sb.is_empty() {
        return None;
    }
    let directed = |from: &[[f64; 3]], to: &[[f64; 3]]| -> Vec<f64> {
        from.iter()
            .map(|&p| to.iter().map(|&q| distance(p, q)).fold(f64::INFINITY, f64::min))
            .collect()
    };
    let mut all = directed(&sa, &sb);
    all.extend(directed(&sb, &sa));
    let sd = all.iter().sum::<f64>() / all.len() as f64;
    let hd = all.iter().copied().fold(0.0, f64::max);
    Some((sd, hd))
}

/// Per-voxel argmax by linear scan, ties to the lowest channel.
pub fn argmax(p: &ProbVolume) -> Vec<u8> {
    let n = p.dims().len();
    (0..n)
        .map(|v| {
            let mut best = 0;
            for c in 1..p.channels() {
                if p.get(c, v) > p.get(best, v) {
                    best = c;
                }
            }
            best as u8
        })
        .collect()
}

/// Voxel-count overlap of class `c`, as `(|A ∩ B|, |A|, |B|)`.
pub fn class_counts(pred: &LabelVolume, gt: &LabelVolume, c: u8) -> (usize, usize, usize) {
    let a: Vec<usize> = (0..pred.data().len()).filter(|&i| pred.data()[i] == c).collect();
    let b: Vec<usize> = (0..gt.data().len()).filter(|&i| gt.data()[i] == c).collect();
    let inter = a.iter().filter(|i| b.contains(i)).count();
    (inter, a.len(), b.len())
}
