//! Overlap and surface-distance metrics between two label volumes.
//!
//! Surfaces are the face-connected boundaries of each class mask; distances
//! are measured between voxel centers in millimetres.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::morph::{boundary, edt};
use crate::volume::{ensure_same_grid, BinaryMask, LabelId, LabelTable, LabelVolume};

/// Header of the CSV produced by [`MetricReport::to_csv`].
pub const CSV_HEADER: &str = "class,dice,jaccard,sd_mm,hd_mm";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum HausdorffMode {
    /// Maximum of the directed surface distances.
    #[default]
    Max,
    /// 95th percentile of the pooled directed surface distances.
    Percentile95,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MetricOptions {
    pub hausdorff: HausdorffMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Overlap {
    pub dice: f64,
    pub jaccard: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceDistances {
    pub sd_mm: f64,
    pub hd_mm: f64,
}

/// Metrics of one foreground class; `None` marks an undefined entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub label: LabelId,
    pub name: String,
    pub dice: Option<f64>,
    pub jaccard: Option<f64>,
    pub sd_mm: Option<f64>,
    pub hd_mm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub classes: Vec<ClassMetrics>,
    pub dice_gen: Option<f64>,
    pub jaccard_gen: Option<f64>,
    /// Mean of the defined per-class surface distances.
    pub sd_mm: Option<f64>,
    /// Mean of the defined per-class Hausdorff distances.
    pub hd_mm: Option<f64>,
}

fn check_grids(pred: &LabelVolume, gt: &LabelVolume) -> Result<()> {
    ensure_same_grid(pred.dims(), gt.dims())?;
    if !pred.spacing().approx_eq(&gt.spacing()) {
        return Err(Error::SpacingMismatch);
    }
    Ok(())
}

fn mask_of(labels: &LabelVolume, c: LabelId) -> BinaryMask {
    let data = labels.data().iter().map(|&l| l == c).collect();
    BinaryMask::new(labels.dims(), data).expect("same grid")
}

/// `(|A ∩ B|, |A|, |B|)` for class `c`.
fn counts(pred: &LabelVolume, gt: &LabelVolume, c: LabelId) -> (usize, usize, usize) {
    let mut inter = 0;
    let mut a = 0;
    let mut b = 0;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        let (ip, ig) = (p == c, g == c);
        a += ip as usize;
        b += ig as usize;
        inter += (ip && ig) as usize;
    }
    (inter, a, b)
}

fn overlap_from_counts(inter: usize, a: usize, b: usize) -> Option<Overlap> {
    if a + b == 0 {
        return None;
    }
    let inter = inter as f64;
    let total = (a + b) as f64;
    Some(Overlap {
        dice: 2.0 * inter / total,
        jaccard: inter / (total - inter),
    })
}

/// Dice and Jaccard of class `c`; `None` when neither volume contains it.
pub fn dice_jaccard(pred: &LabelVolume, gt: &LabelVolume, c: LabelId) -> Result<Option<Overlap>> {
    check_grids(pred, gt)?;
    let (i, a, b) = counts(pred, gt, c);
    Ok(overlap_from_counts(i, a, b))
}

/// Average symmetric surface distance and Hausdorff distance of class `c`;
/// `None` unless both volumes contain the class.
pub fn surface_distances(pred: &LabelVolume, gt: &LabelVolume, c: LabelId) -> Result<Option<SurfaceDistances>> {
    surface_distances_with(pred, gt, c, HausdorffMode::Max)
}

pub fn surface_distances_with(
    pred: &LabelVolume,
    gt: &LabelVolume,
    c: LabelId,
    mode: HausdorffMode,
) -> Result<Option<SurfaceDistances>> {
    check_grids(pred, gt)?;
    let a = mask_of(pred, c);
    let b = mask_of(gt, c);
    if a.none() || b.none() {
        return Ok(None);
    }
    Ok(Some(mask_surface_distances(&a, &b, pred.spacing(), mode)))
}

/// Surface distances between two non-empty masks on the same grid.
pub fn mask_surface_distances(
    a: &BinaryMask,
    b: &BinaryMask,
    spacing: crate::volume::Spacing,
    mode: HausdorffMode,
) -> SurfaceDistances {
    let sa = boundary(a);
    let sb = boundary(b);
    let da = edt(&sa, spacing);
    let db = edt(&sb, spacing);
    let mut dists: Vec<f64> = sa.ones().map(|i| db.at(i)).collect();
    dists.extend(sb.ones().map(|i| da.at(i)));
    let sd = dists.iter().sum::<f64>() / dists.len() as f64;
    let hd = match mode {
        HausdorffMode::Max => dists.iter().copied().fold(0.0, f64::max),
        HausdorffMode::Percentile95 => percentile(&mut dists, 95.0),
    };
    SurfaceDistances { sd_mm: sd, hd_mm: hd }
}

/// Linear-interpolation percentile of a non-empty sample.
fn percentile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let pos = q / 100.0 * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
}

/// Dice and Jaccard pooled over every foreground class of `table`, unweighted.
pub fn generalized(pred: &LabelVolume, gt: &LabelVolume, table: &LabelTable) -> Result<Option<Overlap>> {
    check_grids(pred, gt)?;
    let (mut inter, mut a, mut b) = (0, 0, 0);
    for c in table.foreground() {
        let (i, x, y) = counts(pred, gt, c);
        inter += i;
        a += x;
        b += y;
    }
    Ok(overlap_from_counts(inter, a, b))
}

pub fn report(pred: &LabelVolume, gt: &LabelVolume, table: &LabelTable) -> Result<MetricReport> {
    report_with(pred, gt, table, MetricOptions::default())
}

pub fn report_with(
    pred: &LabelVolume,
    gt: &LabelVolume,
    table: &LabelTable,
    opts: MetricOptions,
) -> Result<MetricReport> {
    check_grids(pred, gt)?;
    pred.check_table(table)?;
    gt.check_table(table)?;
    let foreground: Vec<LabelId> = table.foreground().collect();
    let classes = foreground
        .par_iter()
        .map(|&c| {
            let (i, a, b) = counts(pred, gt, c);
            let overlap = overlap_from_counts(i, a, b);
            let surface = surface_distances_with(pred, gt, c, opts.hausdorff)?;
            Ok(ClassMetrics {
                label: c,
                name: table.name(c).expect("foreground id").to_string(),
                dice: overlap.map(|o| o.dice),
                jaccard: overlap.map(|o| o.jaccard),
                sd_mm: surface.map(|s| s.sd_mm),
                hd_mm: surface.map(|s| s.hd_mm),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gen = generalized(pred, gt, table)?;
    let mean = |f: fn(&ClassMetrics) -> Option<f64>| {
        let vals: Vec<f64> = classes.iter().filter_map(f).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let sd_mm = mean(|c| c.sd_mm);
    let hd_mm = mean(|c| c.hd_mm);
    Ok(MetricReport {
        dice_gen: gen.map(|o| o.dice),
        jaccard_gen: gen.map(|o| o.jaccard),
        sd_mm,
        hd_mm,
        classes,
    })
}

/// Locale-independent number formatting; undefined values become `NA`.
pub fn format_value(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:?}"),
        None => "NA".to_string(),
    }
}

impl MetricReport {
    /// One row per foreground class followed by an `ALL` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let mut row = |name: &str, vals: [Option<f64>; 4]| {
            out.push_str(name);
            for v in vals {
                out.push(',');
                out.push_str(&format_value(v));
            }
            out.push('\n');
        };
        for c in &self.classes {
            row(&c.name, [c.dice, c.jaccard, c.sd_mm, c.hd_mm]);
        }
        row(
            "ALL",
            [self.dice_gen, self.jaccard_gen, self.sd_mm, self.hd_mm],
        );
        out
    }
}
