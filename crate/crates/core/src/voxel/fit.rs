//! Grid scaling and zero padding.
//!
//! Geometry is first rasterized into a "raw" grid whose longest axis spans
//! exactly `resolution - 2 * margin` voxels, then centered in a cubic
//! `resolution³` grid by [`fit_and_pad`].

use crate::geometry::{Aabb, Vec3};

use super::grid::VoxelGrid;
use super::VoxelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoxelizeMode {
    Atoms,
    Mesh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelizeConfig {
    /// Voxels along each axis of the output grid.
    pub resolution: usize,
    pub mode: VoxelizeMode,
    /// Å added to every atomic radius (1.4 approximates a water probe).
    pub probe_inflation: f64,
    /// Voxels of guaranteed empty border on each side.
    pub margin: usize,
    /// Mesh path: fill the interior by scanline parity. `false` keeps only surface voxels.
    pub solid_fill: bool,
    /// Mesh path: fail on inconsistent parity instead of falling back to surface-only.
    pub strict: bool,
}

impl Default for VoxelizeConfig {
    fn default() -> Self {
        VoxelizeConfig {
            resolution: 256,
            mode: VoxelizeMode::Atoms,
            probe_inflation: 0.0,
            margin: 2,
            solid_fill: true,
            strict: false,
        }
    }
}

impl VoxelizeConfig {
    pub fn validate(&self) -> Result<(), VoxelError> {
        let bad = |m: String| Err(VoxelError::InvalidConfig(m));
        if self.resolution < 8 {
            return bad(format!(
                "resolution {} is below the minimum of 8",
                self.resolution
            ));
        }
        if !(self.probe_inflation >= 0.0 && self.probe_inflation.is_finite()) {
            return bad(format!(
                "probe inflation {} must be >= 0",
                self.probe_inflation
            ));
        }
        if 2 * self.margin >= self.resolution {
            return bad(format!(
                "margin {} leaves no room at resolution {}",
                self.margin, self.resolution
            ));
        }
        Ok(())
    }

    /// Voxels available for content along the longest axis.
    pub fn content_voxels(&self) -> usize {
        self.resolution - 2 * self.margin
    }
}

/// Placement of the raw (pre-padding) grid around some geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPlan {
    pub dims: [usize; 3],
    pub voxel_size: f64,
    /// Center of raw voxel (0, 0, 0), Å.
    pub origin: Vec3,
}

impl GridPlan {
    /// Scales `bounds` so its longest side covers `content_voxels` voxels and
    /// centers the raw grid on the box.
    pub fn fit(bounds: &Aabb, content_voxels: usize) -> Result<Self, VoxelError> {
        let ext = bounds.extent();
        let longest = ext.max_component();
        if !(longest > 0.0 && longest.is_finite()) {
            return Err(VoxelError::DegenerateExtent);
        }
        let voxel_size = longest / content_voxels as f64;
        let center = bounds.center();
        let mut dims = [0usize; 3];
        let mut origin = [0.0f64; 3];
        for a in 0..3 {
            // tolerance keeps an exact multiple of the voxel size from rounding up
            let n = (ext[a] / voxel_size - 1e-9).ceil().max(1.0) as usize;
            dims[a] = n.min(content_voxels);
            origin[a] = center[a] - 0.5 * dims[a] as f64 * voxel_size + 0.5 * voxel_size;
        }
        Ok(GridPlan {
            dims,
            voxel_size,
            origin: Vec3::from(origin),
        })
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, x: usize, y: usize, z: usize) -> Vec3 {
        self.origin + Vec3::new(x as f64, y as f64, z as f64) * self.voxel_size
    }
}

/// Unpadded occupancy, one byte per voxel, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RawGrid {
    pub plan: GridPlan,
    pub voxels: Vec<u8>,
}

impl RawGrid {
    pub fn empty(plan: GridPlan) -> Self {
        RawGrid {
            voxels: vec![0; plan.len()],
            plan,
        }
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        let [nx, ny, _] = self.plan.dims;
        self.voxels[x + nx * (y + ny * z)] != 0
    }

    pub fn count_occupied(&self) -> usize {
        self.voxels.iter().filter(|&&v| v != 0).count()
    }
}

/// Centers `raw` in a `resolution³` grid. Padding is split evenly with the odd
/// voxel on the high side; the output origin keeps every raw voxel at its
/// physical position.
pub fn fit_and_pad(raw: &RawGrid, cfg: &VoxelizeConfig) -> Result<VoxelGrid, VoxelError> {
    let res = cfg.resolution;
    let d = raw.plan.dims;
    if d.iter().any(|&n| n > res) {
        return Err(VoxelError::TooLarge {
            dims: d,
            resolution: res,
        });
    }
    let offset = [(res - d[0]) / 2, (res - d[1]) / 2, (res - d[2]) / 2];
    let h = raw.plan.voxel_size;
    let origin =
        raw.plan.origin - Vec3::new(offset[0] as f64, offset[1] as f64, offset[2] as f64) * h;
    let mut grid = VoxelGrid::empty([res; 3], h, origin);
    for z in 0..d[2] {
        for y in 0..d[1] {
            let row = d[0] * (y + d[1] * z);
            for x in 0..d[0] {
                if raw.voxels[row + x] != 0 {
                    grid.set(x + offset[0], y + offset[1], z + offset[2], true);
                }
            }
        }
    }
    Ok(grid)
}
