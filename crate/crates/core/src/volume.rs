//! Dense volume types, the label vocabulary, and index arithmetic.
//!
//! Every grid is stored row-major: depth slowest, width fastest. Probability
//! volumes add a channel axis in front of that (channel-major).

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Label identifier stored per voxel.
pub type LabelId = u8;

/// Tolerance on the per-voxel channel sum of a [`ProbVolume`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Grid extent as (depth, height, width).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Dims {
    pub depth: usize,
    pub height: usize,
    pub width: usize,
}

impl Dims {
    pub fn new(depth: usize, height: usize, width: usize) -> Result<Self> {
        let ok = depth >= 1
            && height >= 1
            && width >= 1
            && depth
                .checked_mul(height)
                .and_then(|n| n.checked_mul(width))
                .is_some_and(|n| n <= isize::MAX as usize);
        if !ok {
            return Err(Error::InvalidDims([depth, height, width]));
        }
        Ok(Self {
            depth,
            height,
            width,
        })
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.depth * self.height * self.width
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn as_array(&self) -> [usize; 3] {
        [self.depth, self.height, self.width]
    }

    #[inline]
    pub fn index(&self, z: usize, y: usize, x: usize) -> usize {
        debug_assert!(z < self.depth && y < self.height && x < self.width);
        (z * self.height + y) * self.width + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.width;
        let rest = index / self.width;
        [rest / self.height, rest % self.height, x]
    }

    /// Index of `(z, y, x) + offset`, or `None` when it falls outside the grid.
    #[inline]
    pub fn offset_index(&self, coords: [usize; 3], offset: [isize; 3]) -> Option<usize> {
        let shifted = |c: usize, o: isize, n: usize| {
            let v = c as isize + o;
            (0..n as isize).contains(&v).then_some(v as usize)
        };
        Some(self.index(
            shifted(coords[0], offset[0], self.depth)?,
            shifted(coords[1], offset[1], self.height)?,
            shifted(coords[2], offset[2], self.width)?,
        ))
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.depth, self.height, self.width)
    }
}

/// Physical voxel edge lengths in millimetres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Spacing {
    pub dz: f64,
    pub dy: f64,
    pub dx: f64,
}

impl Spacing {
    pub fn new(dz: f64, dy: f64, dx: f64) -> Result<Self> {
        let ok = [dz, dy, dx].iter().all(|v| v.is_finite() && *v > 0.0);
        if !ok {
            return Err(Error::InvalidSpacing { dz, dy, dx });
        }
        Ok(Self { dz, dy, dx })
    }

    pub fn isotropic() -> Self {
        Self {
            dz: 1.0,
            dy: 1.0,
            dx: 1.0,
        }
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 3] {
        [self.dz, self.dy, self.dx]
    }

    /// Equality up to a relative tolerance of 1e-6 per axis.
    pub fn approx_eq(&self, other: &Spacing) -> bool {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .all(|(a, b)| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()))
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Self::isotropic()
    }
}

/// Ordered `(id, name)` vocabulary; ids are `0..C` and id 0 is background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelTable {
    names: Vec<String>,
}

/// Names of the default whole-heart table, indexed by label id.
pub const WHS_LABELS: [&str; 8] = ["BG", "Myo", "LV", "RV", "LA", "RA", "AO", "PA"];

impl LabelTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidLabelTable("table is empty".into()));
        }
        if names.len() > LabelId::MAX as usize + 1 {
            return Err(Error::InvalidLabelTable(format!(
                "{} labels exceed the 256-label limit",
                names.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() || name.contains(|c: char| c.is_whitespace() || c == ',' || c == '"')
            {
                return Err(Error::InvalidLabelTable(format!(
                    "label {i} has an invalid name {name:?}"
                )));
            }
            if names[..i].contains(name) {
                return Err(Error::InvalidLabelTable(format!("duplicate name `{name}`")));
            }
        }
        Ok(Self { names })
    }

    /// Builds a table from `(id, name)` pairs given in any order.
    pub fn from_pairs(pairs: &[(u32, String)]) -> Result<Self> {
        let mut slots: Vec<Option<String>> = vec![None; pairs.len()];
        for (id, name) in pairs {
            let slot = slots.get_mut(*id as usize).ok_or_else(|| {
                Error::InvalidLabelTable(format!("ids must be contiguous from 0; found {id}"))
            })?;
            if slot.is_some() {
                return Err(Error::InvalidLabelTable(format!("id {id} declared twice")));
            }
            *slot = Some(name.clone());
        }
        Self::new(slots.into_iter().map(|s| s.expect("all slots filled")))
    }

    pub fn whs() -> Self {
        Self::new(WHS_LABELS).expect("static table is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: LabelId) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, name: &str) -> Option<LabelId> {
        self.names.iter().position(|n| n == name).map(|i| i as LabelId)
    }

    pub fn resolve(&self, name: &str) -> Result<LabelId> {
        self.id(name)
            .ok_or_else(|| Error::UnknownLabelName(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (LabelId, &str)> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (i as LabelId, n.as_str()))
    }

    /// Foreground ids, i.e. every id except background.
    pub fn foreground(&self) -> impl Iterator<Item = LabelId> {
        (1..self.names.len()).map(|i| i as LabelId)
    }
}

impl Default for LabelTable {
    fn default() -> Self {
        Self::whs()
    }
}

/// Discrete label map.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelVolume {
    dims: Dims,
    spacing: Spacing,
    num_classes: usize,
    data: Vec<LabelId>,
}

impl LabelVolume {
    pub fn new(dims: Dims, spacing: Spacing, num_classes: usize, data: Vec<LabelId>) -> Result<Self> {
        if num_classes == 0 || num_classes > LabelId::MAX as usize + 1 {
            return Err(Error::InvalidChannels(num_classes));
        }
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: data.len(),
            });
        }
        if let Some(&bad) = data.iter().find(|&&l| l as usize >= num_classes) {
            return Err(Error::UnknownLabel(bad as u32));
        }
        Ok(Self {
            dims,
            spacing,
            num_classes,
            data,
        })
    }

    pub fn filled(dims: Dims, spacing: Spacing, num_classes: usize, label: LabelId) -> Result<Self> {
        Self::new(dims, spacing, num_classes, vec![label; dims.len()])
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn data(&self) -> &[LabelId] {
        &self.data
    }

    pub fn into_data(self) -> Vec<LabelId> {
        self.data
    }

    #[inline]
    pub fn get(&self, z: usize, y: usize, x: usize) -> LabelId {
        self.data[self.dims.index(z, y, x)]
    }

    /// Errors when the volume uses more classes than `table` declares.
    pub fn check_table(&self, table: &LabelTable) -> Result<()> {
        if let Some(&bad) = self.data.iter().find(|&&l| l as usize >= table.len()) {
            return Err(Error::UnknownLabel(bad as u32));
        }
        Ok(())
    }

    /// Same data with a different declared class count.
    pub fn with_num_classes(self, num_classes: usize) -> Result<Self> {
        Self::new(self.dims, self.spacing, num_classes, self.data)
    }

    /// One-hot likelihood map with `num_classes` channels.
    pub fn one_hot(&self) -> ProbVolume {
        let n = self.dims.len();
        let mut data = vec![0.0; n * self.num_classes];
        for (v, &l) in self.data.iter().enumerate() {
            data[l as usize * n + v] = 1.0;
        }
        ProbVolume {
            dims: self.dims,
            spacing: self.spacing,
            channels: self.num_classes,
            data,
        }
    }
}

/// Per-class likelihoods, channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVolume {
    dims: Dims,
    spacing: Spacing,
    channels: usize,
    data: Vec<f64>,
}

impl ProbVolume {
    /// Validates the value range and the per-voxel channel sums.
    pub fn new(dims: Dims, spacing: Spacing, channels: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_check(dims, spacing, channels, data, true)
    }

    /// Like [`ProbVolume::new`]; `check_sum` toggles the normalization check.
    pub fn with_check(
        dims: Dims,
        spacing: Spacing,
        channels: usize,
        data: Vec<f64>,
        check_sum: bool,
    ) -> Result<Self> {
        if channels == 0 || channels > LabelId::MAX as usize + 1 {
            return Err(Error::InvalidChannels(channels));
        }
        let n = dims.len();
        if data.len() != n * channels {
            return Err(Error::LengthMismatch {
                expected: n * channels,
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::ProbabilityOutOfRange {
                voxel: i % n,
                channel: i / n,
                value: data[i],
            });
        }
        let vol = Self {
            dims,
            spacing,
            channels,
            data,
        };
        if check_sum {
            vol.check_normalized(NORMALIZATION_TOLERANCE)?;
        }
        Ok(vol)
    }

    /// Per-voxel normalized exponential of raw scores (same layout).
    pub fn from_scores(dims: Dims, spacing: Spacing, channels: usize, scores: &[f64]) -> Result<Self> {
        let n = dims.len();
        if channels == 0 {
            return Err(Error::InvalidChannels(channels));
        }
        if scores.len() != n * channels {
            return Err(Error::LengthMismatch {
                expected: n * channels,
                actual: scores.len(),
            });
        }
        let mut data = vec![0.0; n * channels];
        for v in 0..n {
            let max = (0..channels)
                .map(|c| scores[c * n + v])
                .fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for c in 0..channels {
                let e = (scores[c * n + v] - max).exp();
                data[c * n + v] = e;
                sum += e;
            }
            for c in 0..channels {
                data[c * n + v] /= sum;
            }
        }
        Self::new(dims, spacing, channels, data)
    }

    pub fn check_normalized(&self, tolerance: f64) -> Result<()> {
        let n = self.dims.len();
        for v in 0..n {
            let sum: f64 = (0..self.channels).map(|c| self.data[c * n + v]).sum();
            if (sum - 1.0).abs() > tolerance {
                return Err(Error::NotNormalized {
                    voxel: v,
                    sum,
                    tolerance,
                });
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.dims.len();
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, channel: usize, voxel: usize) -> f64 {
        self.data[channel * self.dims.len() + voxel]
    }
}

/// Binary mask over a grid; also the key-voxel mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    dims: Dims,
    data: Vec<bool>,
}

/// The mask of constraint-violating voxels.
pub type KeyVoxelMask = BinaryMask;

impl BinaryMask {
    pub fn new(dims: Dims, data: Vec<bool>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn empty(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![false; dims.len()],
        }
    }

    pub fn full(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![true; dims.len()],
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for z in 0..dims.depth {
            for y in 0..dims.height {
                for x in 0..dims.width {
                    data.push(f(z, y, x));
                }
            }
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [bool] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<bool> {
        self.data
    }

    #[inline]
    pub fn get(&self, z: usize, y: usize, x: usize) -> bool {
        self.data[self.dims.index(z, y, x)]
    }

    #[inline]
    pub fn set(&mut self, z: usize, y: usize, x: usize, value: bool) {
        let i = self.dims.index(z, y, x);
        self.data[i] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn none(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Flat indices of the true voxels in scan order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims == other.dims && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    pub fn union_with(&mut self, other: &BinaryMask) {
        assert_eq!(self.dims, other.dims, "mask dims differ");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BinaryMask) {
        assert_eq!(self.dims, other.dims, "mask dims differ");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a &= b;
        }
    }
}

/// Per-voxel index of the largest channel; ties go to the lowest index.
pub fn argmax_labels(p: &ProbVolume) -> LabelVolume {
    let n = p.dims.len();
    let mut best = vec![0 as LabelId; n];
    let mut best_val = p.channel(0).to_vec();
    for c in 1..p.channels {
        for ((b, bv), &val) in best.iter_mut().zip(best_val.iter_mut()).zip(p.channel(c)) {
            if val > *bv {
                *bv = val;
                *b = c as LabelId;
            }
        }
    }
    LabelVolume {
        dims: p.dims,
        spacing: p.spacing,
        num_classes: p.channels,
        data: best,
    }
}

/// Mask of voxels whose label belongs to `classes`.
pub fn class_mask(labels: &LabelVolume, classes: &[LabelId]) -> Result<BinaryMask> {
    let lut = membership_table(classes, labels.num_classes)?;
    Ok(BinaryMask {
        dims: labels.dims,
        data: labels.data.iter().map(|&l| lut[l as usize]).collect(),
    })
}

pub(crate) fn membership_table(classes: &[LabelId], num_classes: usize) -> Result<[bool; 256]> {
    let mut lut = [false; 256];
    for &c in classes {
        if c as usize >= num_classes {
            return Err(Error::UnknownLabel(c as u32));
        }
        lut[c as usize] = true;
    }
    Ok(lut)
}

pub(crate) fn ensure_same_grid(a: Dims, b: Dims) -> Result<()> {
    if a != b {
        return Err(Error::DimsMismatch { left: a, right: b });
    }
    Ok(())
}
