use std::fmt;

use serde::Serialize;

use super::{key_voxels_one, ConstraintKind, ConstraintSpec};
use crate::error::Result;
use crate::volume::{BinaryMask, Dims, LabelVolume, Spacing};

pub const DEFAULT_SAMPLES: usize = 10;

/// Inclusive `[z, y, x]` corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundingBox {
    pub min: [usize; 3],
    pub max: [usize; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintViolations {
    pub constraint: String,
    pub kind: ConstraintKind,
    pub count: usize,
    pub bbox: Option<BoundingBox>,
    /// First violating voxels in scan order, as `[z, y, x]`.
    pub samples: Vec<[usize; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport {
    pub per_constraint: Vec<ConstraintViolations>,
    /// Voxels violating at least one constraint.
    pub total: usize,
    pub dims: Dims,
    pub spacing: Spacing,
    pub key_voxels: BinaryMask,
}

impl ViolationReport {
    pub fn is_valid(&self) -> bool {
        self.total == 0
    }
}

fn summarize(mask: &BinaryMask, k: usize) -> (usize, Option<BoundingBox>, Vec<[usize; 3]>) {
    let dims = mask.dims();
    let mut count = 0;
    let mut bbox: Option<BoundingBox> = None;
    let mut samples = Vec::new();
    for i in mask.ones() {
        let c = dims.coords(i);
        count += 1;
        if samples.len() < k {
            samples.push(c);
        }
        bbox = Some(match bbox {
            None => BoundingBox { min: c, max: c },
            Some(b) => BoundingBox {
                min: std::array::from_fn(|a| b.min[a].min(c[a])),
                max: std::array::from_fn(|a| b.max[a].max(c[a])),
            },
        });
    }
    (count, bbox, samples)
}

pub fn validate(labels: &LabelVolume, spec: &ConstraintSpec) -> Result<ViolationReport> {
    validate_with(labels, spec, DEFAULT_SAMPLES)
}

/// Per-constraint violation counts; a voxel violating several constraints
/// counts once in `total` and once per constraint.
pub fn validate_with(labels: &LabelVolume, spec: &ConstraintSpec, samples: usize) -> Result<ViolationReport> {
    labels.check_table(spec.table())?;
    let mut union = BinaryMask::empty(labels.dims());
    let mut per_constraint = Vec::with_capacity(spec.constraints().len());
    for (c, xy) in spec.constraints().iter().zip(spec.xy_pairs()?) {
        let mask = key_voxels_one(labels, &xy, spec.connectivity())?;
        let (count, bbox, sample) = summarize(&mask, samples);
        per_constraint.push(ConstraintViolations {
            constraint: c.display(spec.table()).to_string(),
            kind: c.kind,
            count,
            bbox,
            samples: sample,
        });
        union.union_with(&mask);
    }
    Ok(ViolationReport {
        per_constraint,
        total: union.count(),
        dims: labels.dims(),
        spacing: labels.spacing(),
        key_voxels: union,
    })
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.spacing;
        writeln!(f, "dims {} spacing {} {} {}", self.dims, s.dz, s.dy, s.dx)?;
        for c in &self.per_constraint {
            write!(f, "{}: {} violations", c.constraint, c.count)?;
            if let Some(b) = c.bbox {
                write!(f, ", bbox {:?}..{:?}", b.min, b.max)?;
            }
            writeln!(f)?;
        }
        write!(f, "total: {} violations", self.total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Constraint;
    use crate::volume::LabelTable;

    #[test]
    fn overlapping_violations_counted_once_in_total() {
        // LV touching AO breaks both `contain LV Myo` and `exclude LV AO`.
        let t = LabelTable::whs();
        let mut spec = ConstraintSpec::new(t);
        spec.push(Constraint::contain(2, 1)).unwrap();
        spec.push(Constraint::exclude(2, 6)).unwrap();
        let g = LabelVolume::new(Dims::new(2, 1, 1).unwrap(), Spacing::default(), 8, vec![2, 6]).unwrap();
        let r = validate(&g, &spec).unwrap();
        assert_eq!(r.per_constraint[0].count, 2);
        assert_eq!(r.per_constraint[1].count, 2);
        assert_eq!(r.total, 2);
        assert_eq!(
            r.per_constraint[0].bbox,
            Some(BoundingBox {
                min: [0, 0, 0],
                max: [1, 0, 0]
            })
        );
        assert!(!r.is_valid());
        assert!(r.to_string().ends_with("total: 2 violations"));
    }

    #[test]
    fn samples_are_capped() {
        let g = LabelVolume::new(
            Dims::new(1, 1, 6).unwrap(),
            Spacing::default(),
            8,
            vec![5, 6, 5, 6, 5, 6],
        )
        .unwrap();
        let r = validate_with(&g, &ConstraintSpec::whs(), 3).unwrap();
        let ex = &r.per_constraint[1];
        assert_eq!(ex.count, 6);
        assert_eq!(ex.samples, vec![[0, 0, 0], [0, 0, 1], [0, 0, 2]]);
        assert_eq!(r.per_constraint[0].count, 0);
        assert_eq!(r.per_constraint[0].bbox, None);
    }
}
