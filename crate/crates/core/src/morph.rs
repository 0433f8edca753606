//! 3D binary morphology and the exact Euclidean distance transform.
//!
//! Dilation is the binary convolution of a mask with a 3×3×3 structuring
//! element followed by thresholding at one. The kernels are separable (or a
//! union of separable kernels), so each is realized as a few passes of
//! three-tap OR along single axes instead of a 27-tap stencil.

use serde::Serialize;

use crate::volume::{BinaryMask, Dims, Spacing};

/// Which of a voxel's 26 neighbors count as adjacent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum Connectivity {
    /// Shared face.
    Face6,
    /// Shared face or edge.
    Edge18,
    /// Shared face, edge or corner.
    #[default]
    Vertex26,
}

impl Connectivity {
    pub const ALL: [Connectivity; 3] = [Self::Face6, Self::Edge18, Self::Vertex26];

    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            6 => Some(Self::Face6),
            18 => Some(Self::Edge18),
            26 => Some(Self::Vertex26),
            _ => None,
        }
    }

    pub fn count(self) -> u32 {
        match self {
            Self::Face6 => 6,
            Self::Edge18 => 18,
            Self::Vertex26 => 26,
        }
    }

    /// Largest number of nonzero components in a neighbor offset.
    fn max_nonzero(self) -> usize {
        match self {
            Self::Face6 => 1,
            Self::Edge18 => 2,
            Self::Vertex26 => 3,
        }
    }

    /// Neighbor offsets `(dz, dy, dx)`, center excluded.
    pub fn offsets(self) -> Vec<[isize; 3]> {
        let mut out = Vec::with_capacity(self.count() as usize);
        for dz in -1..=1isize {
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let nz = [dz, dy, dx].iter().filter(|&&o| o != 0).count();
                    if nz > 0 && nz <= self.max_nonzero() {
                        out.push([dz, dy, dx]);
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    Z,
    Y,
    X,
}

/// One three-tap OR pass along `axis`.
fn or_pass(src: &[bool], dst: &mut [bool], dims: Dims, axis: Axis) {
    let (d, h, w) = (dims.depth, dims.height, dims.width);
    match axis {
        Axis::X => {
            for (s, o) in src.chunks_exact(w).zip(dst.chunks_exact_mut(w)) {
                if w == 1 {
                    o[0] = s[0];
                    continue;
                }
                o[0] = s[0] | s[1];
                for x in 1..w - 1 {
                    o[x] = s[x - 1] | s[x] | s[x + 1];
                }
                o[w - 1] = s[w - 2] | s[w - 1];
            }
        }
        Axis::Y => {
            let plane = h * w;
            for z in 0..d {
                let base = z * plane;
                for y in 0..h {
                    let row = base + y * w;
                    let out = &mut dst[row..row + w];
                    out.copy_from_slice(&src[row..row + w]);
                    if y > 0 {
                        or_into(out, &src[row - w..row]);
                    }
                    if y + 1 < h {
                        or_into(out, &src[row + w..row + 2 * w]);
                    }
                }
            }
        }
        Axis::Z => {
            let plane = h * w;
            for z in 0..d {
                let base = z * plane;
                let out = &mut dst[base..base + plane];
                out.copy_from_slice(&src[base..base + plane]);
                if z > 0 {
                    or_into(out, &src[base - plane..base]);
                }
                if z + 1 < d {
                    or_into(out, &src[base + plane..base + 2 * plane]);
                }
            }
        }
    }
}

#[inline]
fn or_into(dst: &mut [bool], src: &[bool]) {
    for (a, &b) in dst.iter_mut().zip(src) {
        *a |= b;
    }
}

fn pass(src: &[bool], dims: Dims, axis: Axis) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    or_pass(src, &mut out, dims, axis);
    out
}

/// Dilates `mask` by the structuring element of `conn` (center included).
pub fn dilate(mask: &BinaryMask, conn: Connectivity) -> BinaryMask {
    let dims = mask.dims();
    let src = mask.data();
    let data = match conn {
        Connectivity::Vertex26 => {
            let a = pass(src, dims, Axis::X);
            let b = pass(&a, dims, Axis::Y);
            pass(&b, dims, Axis::Z)
        }
        Connectivity::Edge18 => {
            // Union of the three axis-aligned 3×3 planar boxes.
            let bx = pass(src, dims, Axis::X);
            let by = pass(src, dims, Axis::Y);
            let mut out = pass(&bx, dims, Axis::Y);
            or_into(&mut out, &pass(&bx, dims, Axis::Z));
            or_into(&mut out, &pass(&by, dims, Axis::Z));
            out
        }
        Connectivity::Face6 => {
            let mut out = pass(src, dims, Axis::X);
            or_into(&mut out, &pass(src, dims, Axis::Y));
            or_into(&mut out, &pass(src, dims, Axis::Z));
            out
        }
    };
    BinaryMask::new(dims, data).expect("dilation preserves length")
}

/// Voxels of `mask` with at least one face neighbor that is false or outside
/// the grid.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let dims = mask.dims();
    let (d, h, w) = (dims.depth, dims.height, dims.width);
    let src = mask.data();
    let mut out = vec![false; src.len()];
    for z in 0..d {
        for y in 0..h {
            for x in 0..w {
                let i = dims.index(z, y, x);
                if !src[i] {
                    continue;
                }
                let interior = z > 0
                    && z + 1 < d
                    && y > 0
                    && y + 1 < h
                    && x > 0
                    && x + 1 < w
                    && src[i - 1]
                    && src[i + 1]
                    && src[i - w]
                    && src[i + w]
                    && src[i - h * w]
                    && src[i + h * w];
                out[i] = !interior;
            }
        }
    }
    BinaryMask::new(dims, out).expect("same length")
}

/// Euclidean distance (mm) from every voxel center to the nearest source
/// voxel center. `f64::INFINITY` everywhere when the source is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    dims: Dims,
    spacing: Spacing,
    data: Vec<f64>,
}

impl DistanceField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, z: usize, y: usize, x: usize) -> f64 {
        self.data[self.dims.index(z, y, x)]
    }

    #[inline]
    pub fn at(&self, index: usize) -> f64 {
        self.data[index]
    }
}

/// Squared distance transform of a sampled function along one line, using
/// the lower envelope of parabolas `weight·(q − p)² + f(p)`.
///
/// Infinite samples never enter the envelope; a line with no finite sample
/// stays infinite.
struct Envelope {
    sites: Vec<usize>,
    bounds: Vec<f64>,
    line: Vec<f64>,
    scratch: Vec<f64>,
}

impl Envelope {
    fn new(n: usize) -> Self {
        Self {
            sites: vec![0; n],
            bounds: vec![0.0; n + 1],
            line: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    /// Transforms `self.line` in place.
    fn transform(&mut self, weight: f64) {
        let f = &mut self.line;
        let n = f.len();
        let v = &mut self.sites;
        let z = &mut self.bounds;
        let Some(first) = f.iter().position(|x| x.is_finite()) else {
            return;
        };
        let key = |q: usize, f: &[f64]| f[q] + weight * (q * q) as f64;
        let mut k = 0usize;
        v[0] = first;
        z[0] = f64::NEG_INFINITY;
        z[1] = f64::INFINITY;
        for q in first + 1..n {
            if !f[q].is_finite() {
                continue;
            }
            loop {
                let p = v[k];
                let s = (key(q, f) - key(p, f)) / (2.0 * weight * (q - p) as f64);
                if s <= z[k] {
                    // k > 0 here since z[0] is -inf
                    k -= 1;
                } else {
                    k += 1;
                    v[k] = q;
                    z[k] = s;
                    z[k + 1] = f64::INFINITY;
                    break;
                }
            }
        }
        let out = &mut self.scratch;
        k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            let dq = q.abs_diff(p) as f64;
            *o = weight * dq * dq + f[p];
        }
        f.copy_from_slice(out);
    }
}

/// Exact Euclidean distance transform with anisotropic spacing.
///
/// Three separable passes (x, then y, then z) over squared distances; each
/// pass is linear in the line length.
pub fn edt(mask: &BinaryMask, spacing: Spacing) -> DistanceField {
    let dims = mask.dims();
    let (d, h, w) = (dims.depth, dims.height, dims.width);
    let mut sq: Vec<f64> = mask
        .data()
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();

    let axes = [(w, 1usize, spacing.dx), (h, w, spacing.dy), (d, h * w, spacing.dz)];
    for (len, stride, step) in axes {
        let weight = step * step;
        let mut env = Envelope::new(len);
        let lines = sq.len() / len;
        for line in 0..lines {
            // Base index of the line: decompose `line` over the other two axes.
            let base = (line / stride) * stride * len + line % stride;
            for (i, slot) in env.line.iter_mut().enumerate() {
                *slot = sq[base + i * stride];
            }
            env.transform(weight);
            for (i, &val) in env.line.iter().enumerate() {
                sq[base + i * stride] = val;
            }
        }
    }

    DistanceField {
        dims,
        spacing,
        data: sq.into_iter().map(f64::sqrt).collect(),
    }
}
