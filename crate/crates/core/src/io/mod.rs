//! Volume serialization.
//!
//! Volumes are written in the TGVOL1 container; NIfTI-1 single-file images
//! can be read for interoperability.

mod nifti;
mod raw;

use std::path::Path;

use crate::error::{Error, Result};
use crate::volume::{BinaryMask, LabelVolume, ProbVolume};

pub use nifti::{parse_nifti, read_nifti, NiftiVolume, NIFTI1_HEADER_SIZE};
pub use raw::{decode, encode, Dtype, HEADER_LEN, MAGIC};

/// Any volume the TGVOL1 container can hold.
#[derive(Clone, Debug, PartialEq)]
pub enum Volume {
    Labels(LabelVolume),
    Probs(ProbVolume),
    Mask(MaskVolume),
}

/// A mask with the physical spacing it was written with.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskVolume {
    pub mask: BinaryMask,
    pub spacing: crate::volume::Spacing,
}

impl Volume {
    pub fn dtype(&self) -> Dtype {
        match self {
            Volume::Labels(_) => Dtype::Labels,
            Volume::Probs(_) => Dtype::Probs,
            Volume::Mask(_) => Dtype::Mask,
        }
    }

    pub fn into_labels(self) -> Result<LabelVolume> {
        match self {
            Volume::Labels(v) => Ok(v),
            other => Err(Error::DtypeMismatch {
                expected: Dtype::Labels.name(),
                found: other.dtype().name(),
            }),
        }
    }

    pub fn into_probs(self) -> Result<ProbVolume> {
        match self {
            Volume::Probs(v) => Ok(v),
            other => Err(Error::DtypeMismatch {
                expected: Dtype::Probs.name(),
                found: other.dtype().name(),
            }),
        }
    }

    pub fn into_mask(self) -> Result<MaskVolume> {
        match self {
            Volume::Mask(v) => Ok(v),
            other => Err(Error::DtypeMismatch {
                expected: Dtype::Mask.name(),
                found: other.dtype().name(),
            }),
        }
    }
}

impl From<LabelVolume> for Volume {
    fn from(v: LabelVolume) -> Self {
        Volume::Labels(v)
    }
}

impl From<ProbVolume> for Volume {
    fn from(v: ProbVolume) -> Self {
        Volume::Probs(v)
    }
}

impl From<MaskVolume> for Volume {
    fn from(v: MaskVolume) -> Self {
        Volume::Mask(v)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_volume(path: impl AsRef<Path>, volume: &Volume) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(volume)).map_err(io_err(path))
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode(&bytes)
}

/// Reads labels from a TGVOL1 file, or from NIfTI when the name ends in
/// `.nii` (`.nii.gz` is recognized only to report that it is unsupported).
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelVolume> {
    let path = path.as_ref();
    if is_nifti(path) {
        match read_nifti(path)? {
            NiftiVolume::Labels(v) => Ok(v),
            NiftiVolume::Probs(_) => Err(Error::DtypeMismatch {
                expected: Dtype::Labels.name(),
                found: Dtype::Probs.name(),
            }),
        }
    } else {
        read_volume(path)?.into_labels()
    }
}

/// Reads likelihoods from a TGVOL1 file, or a 4D NIfTI image.
pub fn load_probs(path: impl AsRef<Path>) -> Result<ProbVolume> {
    let path = path.as_ref();
    if is_nifti(path) {
        match read_nifti(path)? {
            NiftiVolume::Probs(v) => Ok(v),
            NiftiVolume::Labels(_) => Err(Error::DtypeMismatch {
                expected: Dtype::Probs.name(),
                found: Dtype::Labels.name(),
            }),
        }
    } else {
        read_volume(path)?.into_probs()
    }
}

fn is_nifti(path: &Path) -> bool {
    let name = path.to_string_lossy().to_ascii_lowercase();
    name.ends_with(".nii") || name.ends_with(".nii.gz")
}
