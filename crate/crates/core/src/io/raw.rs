//! TGVOL1 container.
//!
//! All fields little-endian:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 8    | magic `TGVOL1\0\0`                     |
//! | 8      | 4    | dtype: 0 labels (u8), 1 probs (f32), 2 mask (u8 0/1) |
//! | 12     | 4    | channels                               |
//! | 16     | 12   | depth, height, width (u32)             |
//! | 28     | 24   | dz, dy, dx (f64, mm)                   |
//! | 52     | ..   | payload, channel-major then row-major  |
//!
//! For label volumes `channels` holds the declared class count; masks always
//! carry one channel.

use super::{MaskVolume, Volume};
use crate::error::{Error, Result};
use crate::volume::{BinaryMask, Dims, LabelVolume, ProbVolume, Spacing};

pub const MAGIC: [u8; 8] = *b"TGVOL1\0\0";
pub const HEADER_LEN: usize = 52;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u32)]
pub enum Dtype {
    Labels = 0,
    Probs = 1,
    Mask = 2,
}

impl Dtype {
    pub fn from_code(code: u32) -> Result<Self> {
        match code {
            0 => Ok(Self::Labels),
            1 => Ok(Self::Probs),
            2 => Ok(Self::Mask),
            other => Err(Error::UnknownDtype(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Labels => "labels",
            Self::Probs => "probabilities",
            Self::Mask => "mask",
        }
    }

    fn bytes_per_value(self) -> usize {
        match self {
            Self::Probs => 4,
            Self::Labels | Self::Mask => 1,
        }
    }
}

fn header(out: &mut Vec<u8>, dtype: Dtype, channels: usize, dims: Dims, spacing: Spacing) {
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(dtype as u32).to_le_bytes());
    out.extend_from_slice(&u32_field(channels).to_le_bytes());
    for n in dims.as_array() {
        out.extend_from_slice(&u32_field(n).to_le_bytes());
    }
    for s in spacing.as_array() {
        out.extend_from_slice(&s.to_le_bytes());
    }
}

fn u32_field(n: usize) -> u32 {
    u32::try_from(n).expect("extent exceeds the u32 container limit")
}

/// Serializes a volume. Likelihoods are stored as f32.
pub fn encode(volume: &Volume) -> Vec<u8> {
    let mut out = Vec::new();
    match volume {
        Volume::Labels(v) => {
            out.reserve(HEADER_LEN + v.data().len());
            header(&mut out, Dtype::Labels, v.num_classes(), v.dims(), v.spacing());
            out.extend_from_slice(v.data());
        }
        Volume::Probs(v) => {
            out.reserve(HEADER_LEN + 4 * v.data().len());
            header(&mut out, Dtype::Probs, v.channels(), v.dims(), v.spacing());
            for &x in v.data() {
                out.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
        Volume::Mask(m) => {
            out.reserve(HEADER_LEN + m.mask.data().len());
            header(&mut out, Dtype::Mask, 1, m.mask.dims(), m.spacing);
            out.extend(m.mask.data().iter().map(|&b| b as u8));
        }
    }
    out
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn le_f64(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<Volume> {
    if bytes.len() < MAGIC.len() || bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let dtype = Dtype::from_code(le_u32(bytes, 8))?;
    let channels = le_u32(bytes, 12) as usize;
    let dims = Dims::new(
        le_u32(bytes, 16) as usize,
        le_u32(bytes, 20) as usize,
        le_u32(bytes, 24) as usize,
    )?;
    let spacing = Spacing::new(le_f64(bytes, 28), le_f64(bytes, 36), le_f64(bytes, 44))?;
    if channels == 0 || (dtype == Dtype::Mask && channels != 1) {
        return Err(Error::InvalidChannels(channels));
    }
    let values = match dtype {
        Dtype::Probs => dims.len().checked_mul(channels),
        Dtype::Labels | Dtype::Mask => Some(dims.len()),
    }
    .ok_or(Error::InvalidDims(dims.as_array()))?;
    let expected = values
        .checked_mul(dtype.bytes_per_value())
        .ok_or(Error::InvalidDims(dims.as_array()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes {
            found: payload.len() - expected,
        });
    }

    Ok(match dtype {
        Dtype::Labels => Volume::Labels(LabelVolume::new(dims, spacing, channels, payload.to_vec())?),
        Dtype::Probs => {
            let mut data = Vec::with_capacity(values);
            for (i, chunk) in payload.chunks_exact(4).enumerate() {
                let x = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
                if x.is_nan() {
                    return Err(Error::NanProbability(i));
                }
                data.push(f64::from(x));
            }
            Volume::Probs(ProbVolume::with_check(dims, spacing, channels, data, false)?)
        }
        Dtype::Mask => {
            let data = payload
                .iter()
                .enumerate()
                .map(|(voxel, &value)| match value {
                    0 => Ok(false),
                    1 => Ok(true),
                    value => Err(Error::InvalidMaskByte { voxel, value }),
                })
                .collect::<Result<Vec<bool>>>()?;
            Volume::Mask(MaskVolume {
                mask: BinaryMask::new(dims, data)?,
                spacing,
            })
        }
    })
}
