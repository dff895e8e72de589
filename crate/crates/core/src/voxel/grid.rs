use std::io::{Read, Write};
use std::path::Path;

use crate::geometry::Vec3;

pub const GRID_MAGIC: &[u8; 4] = b"VAFM";
pub const GRID_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 3 * 4 + 8 + 3 * 8;

/// Binary occupancy grid with cubic voxels.
///
/// Bits are stored x-fastest, then y, then z, packed least-significant-bit
/// first into bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    dims: [usize; 3],
    voxel_size: f64,
    origin: Vec3,
    bits: Vec<u8>,
}

#[derive(Debug, thiserror::Error)]
pub enum GridIoError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a VAFM grid file (bad magic)")]
    BadMagic,
    #[error("unsupported VAFM grid version {0}")]
    UnsupportedVersion(u32),
    #[error("invalid grid header: {0}")]
    InvalidHeader(String),
    #[error("occupancy payload has {actual} bytes, expected {expected}")]
    Truncated { expected: usize, actual: usize },
}

impl VoxelGrid {
    /// All-empty grid. Panics if any dimension is zero or `voxel_size` is not positive.
    pub fn empty(dims: [usize; 3], voxel_size: f64, origin: Vec3) -> Self {
        assert!(dims.iter().all(|&d| d > 0), "grid dims must be positive");
        assert!(
            voxel_size > 0.0 && voxel_size.is_finite(),
            "voxel size must be positive"
        );
        let n = dims[0] * dims[1] * dims[2];
        VoxelGrid {
            dims,
            voxel_size,
            origin,
            bits: vec![0; n.div_ceil(8)],
        }
    }

    /// Builds a grid from one byte per voxel (non-zero = occupied), x-fastest.
    pub fn from_voxels(dims: [usize; 3], voxel_size: f64, origin: Vec3, voxels: &[u8]) -> Self {
        let mut g = Self::empty(dims, voxel_size, origin);
        assert_eq!(voxels.len(), g.len(), "voxel buffer length must match dims");
        for (i, &v) in voxels.iter().enumerate() {
            if v != 0 {
                g.bits[i >> 3] |= 1 << (i & 7);
            }
        }
        g
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Edge length of one voxel, Å.
    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    /// Center of voxel (0, 0, 0), Å.
    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        let i = self.index(x, y, z);
        self.bits[i >> 3] & (1 << (i & 7)) != 0
    }

    /// Like [`get`](Self::get) but out-of-range coordinates read as empty.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64, z: i64) -> bool {
        if x < 0 || y < 0 || z < 0 {
            return false;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        x < self.dims[0] && y < self.dims[1] && z < self.dims[2] && self.get(x, y, z)
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.index(x, y, z);
        if value {
            self.bits[i >> 3] |= 1 << (i & 7);
        } else {
            self.bits[i >> 3] &= !(1 << (i & 7));
        }
    }

    pub fn count_occupied(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Center of voxel `(x, y, z)`, Å.
    pub fn voxel_center(&self, x: usize, y: usize, z: usize) -> Vec3 {
        self.origin + Vec3::new(x as f64, y as f64, z as f64) * self.voxel_size
    }

    /// Voxel containing point `p` (Å), if inside the grid.
    pub fn voxel_at(&self, p: Vec3) -> Option<[usize; 3]> {
        let rel = (p - self.origin) / self.voxel_size;
        let mut out = [0usize; 3];
        for a in 0..3 {
            let i = (rel[a] + 0.5).floor();
            if i < 0.0 || i >= self.dims[a] as f64 {
                return None;
            }
            out[a] = i as usize;
        }
        Some(out)
    }

    /// Inclusive index bounds `(min, max)` of occupied voxels.
    pub fn occupied_bounds(&self) -> Option<([usize; 3], [usize; 3])> {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        let [nx, ny, _] = self.dims;
        for (byte_i, &byte) in self.bits.iter().enumerate() {
            if byte == 0 {
                continue;
            }
            for bit in 0..8 {
                if byte & (1 << bit) == 0 {
                    continue;
                }
                let i = byte_i * 8 + bit;
                let c = [i % nx, (i / nx) % ny, i / (nx * ny)];
                for a in 0..3 {
                    lo[a] = lo[a].min(c[a]);
                    hi[a] = hi[a].max(c[a]);
                }
                any = true;
            }
        }
        any.then_some((lo, hi))
    }

    /// Number of voxels spanned by occupied content along each axis.
    pub fn occupied_extent(&self) -> [usize; 3] {
        match self.occupied_bounds() {
            Some((lo, hi)) => [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1],
            None => [0; 3],
        }
    }

    /// Serializes in the `VAFM1` layout (little-endian header, then the bit array).
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = Vec::with_capacity(HEADER_LEN);
        header.extend_from_slice(GRID_MAGIC);
        header.extend_from_slice(&GRID_VERSION.to_le_bytes());
        for d in self.dims {
            header.extend_from_slice(&(d as u32).to_le_bytes());
        }
        header.extend_from_slice(&self.voxel_size.to_le_bytes());
        for c in self.origin.to_array() {
            header.extend_from_slice(&c.to_le_bytes());
        }
        w.write_all(&header)?;
        w.write_all(&self.bits)?;
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, GridIoError> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)?;
        if &header[0..4] != GRID_MAGIC {
            return Err(GridIoError::BadMagic);
        }
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != GRID_VERSION {
            return Err(GridIoError::UnsupportedVersion(version));
        }
        let dims = [u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize];
        let voxel_size = f64_at(20);
        let origin = Vec3::new(f64_at(28), f64_at(36), f64_at(44));
        if dims.contains(&0) {
            return Err(GridIoError::InvalidHeader(format!(
                "zero dimension in {dims:?}"
            )));
        }
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(GridIoError::InvalidHeader(format!(
                "voxel size {voxel_size}"
            )));
        }
        if !origin.is_finite() {
            return Err(GridIoError::InvalidHeader("non-finite origin".into()));
        }
        let expected = (dims[0] * dims[1] * dims[2]).div_ceil(8);
        let mut bits = Vec::with_capacity(expected);
        r.read_to_end(&mut bits)?;
        if bits.len() != expected {
            return Err(GridIoError::Truncated {
                expected,
                actual: bits.len(),
            });
        }
        Ok(VoxelGrid {
            dims,
            voxel_size,
            origin,
            bits,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), GridIoError> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, GridIoError> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}
