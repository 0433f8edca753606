use std::path::PathBuf;

use crate::volume::Dims;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions {0:?}: every axis must be at least 1 and the voxel count addressable")]
    InvalidDims([usize; 3]),

    #[error("invalid spacing ({dz}, {dy}, {dx}): every component must be positive and finite")]
    InvalidSpacing { dz: f64, dy: f64, dx: f64 },

    #[error("data length {actual} does not match expected length {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unknown label id {0}")]
    UnknownLabel(u32),

    #[error("unknown label name `{0}`")]
    UnknownLabelName(String),

    #[error("invalid label table: {0}")]
    InvalidLabelTable(String),

    #[error("invalid channel count {0}")]
    InvalidChannels(usize),

    #[error("probability {value} at voxel {voxel}, channel {channel} is outside [0, 1]")]
    ProbabilityOutOfRange {
        voxel: usize,
        channel: usize,
        value: f64,
    },

    #[error("channel sum {sum} at voxel {voxel} differs from 1 by more than {tolerance}")]
    NotNormalized {
        voxel: usize,
        sum: f64,
        tolerance: f64,
    },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    DimsMismatch { left: Dims, right: Dims },

    #[error("channel count mismatch: {left} vs {right}")]
    ChannelMismatch { left: usize, right: usize },

    #[error("spacing mismatch between volumes")]
    SpacingMismatch,

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("duplicate constraint `{0}`")]
    DuplicateConstraint(String),

    #[error("constraint spec line {line}: {message}")]
    SpecParse { line: usize, message: String },

    #[error("invalid phantom parameters: {0}")]
    InvalidPhantom(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad magic: expected TGVOL1 container")]
    BadMagic,

    #[error("unknown dtype code {0}")]
    UnknownDtype(u32),

    #[error("dtype mismatch: expected {expected}, file holds {found}")]
    DtypeMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("{found} trailing bytes after payload")]
    TrailingBytes { found: usize },

    #[error("NaN probability at index {0}")]
    NanProbability(usize),

    #[error("invalid mask byte {value} at voxel {voxel}")]
    InvalidMaskByte { voxel: usize, value: u8 },

    #[error("NIfTI: {0}")]
    Nifti(String),

    #[error("NIfTI: compressed input is not supported; decompress it first")]
    NiftiCompressed,

    #[error("NIfTI: unsupported variant (magic {0:?}); only single-file n+1 is read")]
    NiftiUnsupportedVariant([u8; 4]),

    #[error("NIfTI: unsupported datatype code {0}")]
    NiftiUnsupportedDatatype(i16),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
