use rayon::prelude::*;

use super::{ConstraintSpec, XYPair};
use crate::error::Result;
use crate::morph::{dilate, Connectivity};
use crate::volume::{class_mask, membership_table, BinaryMask, KeyVoxelMask, LabelVolume};

/// Voxels of one X/Y pair that touch the other set under `conn`.
pub fn key_voxels_one(labels: &LabelVolume, xy: &XYPair, conn: Connectivity) -> Result<BinaryMask> {
    let mx = class_mask(labels, xy.x())?;
    let my = class_mask(labels, xy.y())?;
    if mx.none() || my.none() {
        return Ok(BinaryMask::empty(labels.dims()));
    }
    let mut near_x = dilate(&mx, conn);
    near_x.intersect_with(&my);
    let mut near_y = dilate(&my, conn);
    near_y.intersect_with(&mx);
    near_x.union_with(&near_y);
    Ok(near_x)
}

/// Union of [`key_voxels_one`] over every constraint of `spec`.
pub fn key_voxels(labels: &LabelVolume, spec: &ConstraintSpec) -> Result<KeyVoxelMask> {
    labels.check_table(spec.table())?;
    let pairs = spec.xy_pairs()?;
    let conn = spec.connectivity();
    let masks = pairs
        .par_iter()
        .map(|xy| key_voxels_one(labels, xy, conn))
        .collect::<Result<Vec<_>>>()?;
    let mut out = BinaryMask::empty(labels.dims());
    for m in &masks {
        out.union_with(m);
    }
    Ok(out)
}

/// Reference key-voxel mask by direct enumeration of adjacent voxel pairs.
///
/// Marks both endpoints of every neighbor pair where one voxel is in X and
/// the other in Y, for any constraint. O(voxels · neighbors · constraints).
pub fn brute_force_key_voxels(labels: &LabelVolume, spec: &ConstraintSpec) -> Result<BinaryMask> {
    labels.check_table(spec.table())?;
    let dims = labels.dims();
    let offsets = spec.connectivity().offsets();
    let data = labels.data();
    let mut out = vec![false; dims.len()];
    for xy in spec.xy_pairs()? {
        let in_x = membership_table(xy.x(), labels.num_classes())?;
        let in_y = membership_table(xy.y(), labels.num_classes())?;
        for v in 0..dims.len() {
            let coords = dims.coords(v);
            let lv = data[v] as usize;
            for &off in &offsets {
                let Some(u) = dims.offset_index(coords, off) else {
                    continue;
                };
                let lu = data[u] as usize;
                if (in_x[lv] && in_y[lu]) || (in_y[lv] && in_x[lu]) {
                    out[v] = true;
                    out[u] = true;
                }
            }
        }
    }
    BinaryMask::new(dims, out)
}
