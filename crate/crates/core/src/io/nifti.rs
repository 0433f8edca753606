//! Minimal NIfTI-1 reader: uncompressed single-file (`n+1`) images with up to
//! four dimensions, either endianness.
//!
//! NIfTI stores x fastest, then y, z and t, which is exactly the
//! width/height/depth/channel order used here, so no reordering is needed.

use std::path::Path;

use crate::error::{Error, Result};
use crate::volume::{Dims, LabelId, LabelVolume, ProbVolume, Spacing};

pub const NIFTI1_HEADER_SIZE: usize = 348;

const DIM: usize = 40;
const DATATYPE: usize = 70;
const PIXDIM: usize = 76;
const VOX_OFFSET: usize = 108;
const SCL_SLOPE: usize = 112;
const SCL_INTER: usize = 116;
const MAGIC: usize = 344;

#[derive(Clone, Debug, PartialEq)]
pub enum NiftiVolume {
    Labels(LabelVolume),
    Probs(ProbVolume),
}

#[derive(Clone, Copy)]
enum DataType {
    U8,
    I8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl DataType {
    fn from_code(code: i16) -> Result<Self> {
        Ok(match code {
            2 => Self::U8,
            4 => Self::I16,
            8 => Self::I32,
            16 => Self::F32,
            64 => Self::F64,
            256 => Self::I8,
            512 => Self::U16,
            768 => Self::U32,
            other => return Err(Error::NiftiUnsupportedDatatype(other)),
        })
    }

    fn size(self) -> usize {
        match self {
            Self::U8 | Self::I8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    big_endian: bool,
}

impl Reader<'_> {
    fn take<const N: usize>(&self, at: usize) -> [u8; N] {
        let mut b: [u8; N] = self.bytes[at..at + N].try_into().expect("in bounds");
        if self.big_endian {
            b.reverse();
        }
        b
    }

    fn i16(&self, at: usize) -> i16 {
        i16::from_le_bytes(self.take(at))
    }

    fn i32(&self, at: usize) -> i32 {
        i32::from_le_bytes(self.take(at))
    }

    fn f32(&self, at: usize) -> f32 {
        f32::from_le_bytes(self.take(at))
    }

    fn value(&self, ty: DataType, at: usize) -> f64 {
        match ty {
            DataType::U8 => f64::from(self.bytes[at]),
            DataType::I8 => f64::from(self.bytes[at] as i8),
            DataType::I16 => f64::from(i16::from_le_bytes(self.take(at))),
            DataType::U16 => f64::from(u16::from_le_bytes(self.take(at))),
            DataType::I32 => f64::from(i32::from_le_bytes(self.take(at))),
            DataType::U32 => f64::from(u32::from_le_bytes(self.take(at))),
            DataType::F32 => f64::from(f32::from_le_bytes(self.take(at))),
            DataType::F64 => f64::from_le_bytes(self.take(at)),
        }
    }
}

pub fn read_nifti(path: impl AsRef<Path>) -> Result<NiftiVolume> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_nifti(&bytes)
}

/// Parses an in-memory single-file NIfTI-1 image.
///
/// Three-dimensional images become label volumes (values must be integers in
/// `0..=255`); a fourth axis longer than one becomes the channel axis of a
/// likelihood map.
pub fn parse_nifti(bytes: &[u8]) -> Result<NiftiVolume> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        return Err(Error::NiftiCompressed);
    }
    if bytes.len() < NIFTI1_HEADER_SIZE {
        return Err(Error::Truncated {
            expected: NIFTI1_HEADER_SIZE,
            found: bytes.len(),
        });
    }
    let size = |big_endian| Reader { bytes, big_endian }.i32(0);
    let big_endian = match (size(false), size(true)) {
        (348, _) => false,
        (_, 348) => true,
        (n, _) => return Err(Error::Nifti(format!("sizeof_hdr is {n}, expected 348"))),
    };
    let r = Reader { bytes, big_endian };

    let magic: [u8; 4] = bytes[MAGIC..MAGIC + 4].try_into().expect("4 bytes");
    match &magic {
        b"n+1\0" => {}
        b"ni1\0" => return Err(Error::NiftiUnsupportedVariant(magic)),
        _ => return Err(Error::Nifti(format!("bad magic {magic:?}"))),
    }

    let ndim = r.i16(DIM);
    if !(1..=4).contains(&ndim) {
        return Err(Error::Nifti(format!("{ndim} dimensions; at most 4 are supported")));
    }
    let ndim = ndim as usize;
    let extent = |axis: usize| -> Result<usize> {
        if axis > ndim {
            return Ok(1);
        }
        let n = r.i16(DIM + 2 * axis);
        usize::try_from(n)
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::Nifti(format!("dim[{axis}] = {n}")))
    };
    let (width, height, depth, channels) = (extent(1)?, extent(2)?, extent(3)?, extent(4)?);
    let dims = Dims::new(depth, height, width)?;

    let step = |axis: usize| {
        if axis > ndim {
            1.0
        } else {
            f64::from(r.f32(PIXDIM + 4 * axis))
        }
    };
    let spacing = Spacing::new(step(3), step(2), step(1))?;

    let ty = DataType::from_code(r.i16(DATATYPE))?;
    let offset = r.f32(VOX_OFFSET);
    if !offset.is_finite() || offset < NIFTI1_HEADER_SIZE as f32 {
        return Err(Error::Nifti(format!("vox_offset {offset} precedes the data")));
    }
    let offset = offset as usize;
    let count = dims.len() * channels;
    let needed = count
        .checked_mul(ty.size())
        .and_then(|n| n.checked_add(offset))
        .unwrap_or(usize::MAX);
    if bytes.len() < needed {
        return Err(Error::Truncated {
            expected: needed,
            found: bytes.len(),
        });
    }

    let slope = f64::from(r.f32(SCL_SLOPE));
    let inter = f64::from(r.f32(SCL_INTER));
    let scaled = slope != 0.0 && slope.is_finite() && inter.is_finite();
    let values = (0..count).map(|i| {
        let v = r.value(ty, offset + i * ty.size());
        if scaled {
            v * slope + inter
        } else {
            v
        }
    });

    if channels == 1 {
        let data = values
            .enumerate()
            .map(|(i, v)| {
                if v.fract() == 0.0 && (0.0..=255.0).contains(&v) {
                    Ok(v as LabelId)
                } else {
                    Err(Error::Nifti(format!("voxel {i} holds {v}, not a label id")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let classes = data.iter().copied().max().unwrap_or(0) as usize + 1;
        Ok(NiftiVolume::Labels(LabelVolume::new(dims, spacing, classes, data)?))
    } else {
        let data: Vec<f64> = values.collect();
        if let Some(i) = data.iter().position(|v| v.is_nan()) {
            return Err(Error::NanProbability(i));
        }
        Ok(NiftiVolume::Probs(ProbVolume::with_check(
            dims, spacing, channels, data, false,
        )?))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Builds a 352-byte-offset NIfTI-1 image following the public header
    /// layout, little-endian unless `big_endian`.
    pub(crate) fn fixture(
        dim: &[i16],
        pixdim: [f32; 3],
        datatype: i16,
        payload: &[u8],
        big_endian: bool,
    ) -> Vec<u8> {
        let mut b = vec![0u8; 352];
        let put = |b: &mut Vec<u8>, at: usize, raw: &[u8]| {
            let mut raw = raw.to_vec();
            if big_endian {
                raw.reverse();
            }
            b[at..at + raw.len()].copy_from_slice(&raw);
        };
        put(&mut b, 0, &348i32.to_le_bytes());
        put(&mut b, 40, &(dim.len() as i16).to_le_bytes());
        for (i, d) in dim.iter().enumerate() {
            put(&mut b, 42 + 2 * i, &d.to_le_bytes());
        }
        put(&mut b, 70, &datatype.to_le_bytes());
        put(&mut b, 76, &1.0f32.to_le_bytes());
        for (i, p) in pixdim.iter().enumerate() {
            put(&mut b, 80 + 4 * i, &p.to_le_bytes());
        }
        put(&mut b, 108, &352.0f32.to_le_bytes());
        b[344..348].copy_from_slice(b"n+1\0");
        b.extend_from_slice(payload);
        b
    }

    #[test]
    fn uint8_labels() {
        let payload = [0u8, 1, 2, 3, 4, 5, 6, 7];
        let bytes = fixture(&[2, 2, 2], [1.5, 1.0, 2.0], 2, &payload, false);
        let NiftiVolume::Labels(v) = parse_nifti(&bytes).unwrap() else {
            panic!("expected labels");
        };
        assert_eq!(v.dims(), Dims::new(2, 2, 2).unwrap());
        assert_eq!(v.data(), &payload);
        assert_eq!(v.num_classes(), 8);
        let s = v.spacing();
        assert_eq!((s.dx, s.dy, s.dz), (1.5, 1.0, 2.0));
        // x fastest: voxel (z=0, y=0, x=1) is payload[1]
        assert_eq!(v.get(0, 0, 1), 1);
        assert_eq!(v.get(1, 0, 0), 4);
    }

    #[test]
    fn big_endian_int16() {
        let mut payload = Vec::new();
        for v in [3i16, 0, 1, 2] {
            payload.extend_from_slice(&v.to_be_bytes());
        }
        let bytes = fixture(&[4, 1, 1], [1.0, 1.0, 1.0], 4, &payload, true);
        let NiftiVolume::Labels(v) = parse_nifti(&bytes).unwrap() else {
            panic!("expected labels");
        };
        assert_eq!(v.data(), &[3, 0, 1, 2]);
        assert_eq!(v.dims().width, 4);
    }

    #[test]
    fn scaling_applied() {
        let bytes = {
            let mut b = fixture(&[2, 1, 1], [1.0, 1.0, 1.0], 2, &[1, 2], false);
            b[112..116].copy_from_slice(&2.0f32.to_le_bytes());
            b[116..120].copy_from_slice(&1.0f32.to_le_bytes());
            b
        };
        let NiftiVolume::Labels(v) = parse_nifti(&bytes).unwrap() else {
            panic!("expected labels");
        };
        assert_eq!(v.data(), &[3, 5]);
    }

    #[test]
    fn four_dimensional_probabilities() {
        let mut payload = Vec::new();
        for v in [0.25f32, 1.0, 0.75, 0.0] {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        let bytes = fixture(&[2, 1, 1, 2], [1.0, 1.0, 1.0], 16, &payload, false);
        let NiftiVolume::Probs(p) = parse_nifti(&bytes).unwrap() else {
            panic!("expected probabilities");
        };
        assert_eq!(p.channels(), 2);
        assert_eq!(p.channel(1), &[0.75, 0.0]);
        assert!(p.check_normalized(1e-12).is_ok());
    }

    #[test]
    fn error_paths() {
        let good = fixture(&[2, 2, 2], [1.0, 1.0, 1.0], 2, &[0; 8], false);

        let mut b = good.clone();
        b[344..348].copy_from_slice(b"ni1\0");
        assert!(matches!(parse_nifti(&b), Err(Error::NiftiUnsupportedVariant(_))));

        let mut b = good.clone();
        b[344..348].copy_from_slice(b"xyz\0");
        assert!(matches!(parse_nifti(&b), Err(Error::Nifti(_))));

        let mut b = good.clone();
        b[70..72].copy_from_slice(&128i16.to_le_bytes());
        assert!(matches!(parse_nifti(&b), Err(Error::NiftiUnsupportedDatatype(128))));

        assert!(matches!(parse_nifti(&[0x1f, 0x8b, 8, 0]), Err(Error::NiftiCompressed)));
        assert!(matches!(parse_nifti(&good[..good.len() - 1]), Err(Error::Truncated { .. })));
        assert!(matches!(parse_nifti(&good[..100]), Err(Error::Truncated { .. })));

        let mut b = good.clone();
        b[40..42].copy_from_slice(&5i16.to_le_bytes());
        assert!(matches!(parse_nifti(&b), Err(Error::Nifti(_))));

        let mut b = good;
        b[0..4].copy_from_slice(&540i32.to_le_bytes());
        assert!(matches!(parse_nifti(&b), Err(Error::Nifti(_))));

        let floats = fixture(&[1, 1, 1], [1.0, 1.0, 1.0], 16, &0.5f32.to_le_bytes(), false);
        assert!(matches!(parse_nifti(&floats), Err(Error::Nifti(_))));
    }
}
