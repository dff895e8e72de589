//! Orthographic top-surface ray casting.
//!
//! The grid is never resampled. For a view rotation `R`, each pixel's ray is
//! expressed in the unrotated grid frame (direction `Rᵀ·(0, 0, −1)`) and walked
//! voxel by voxel with the Amanatides–Woo traversal. All geometry below is in
//! voxel units with the grid occupying `[0, n]` on each axis; heights are
//! converted to Å at the end.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::geometry::{Rotation, Vec3};
use crate::voxel::VoxelGrid;

use super::colormap::{Colormap, Normalization};

pub const HEIGHT_MAGIC: &[u8; 4] = b"VHM1";

/// Heights in Å above the substrate plane, row-major, row 0 first.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    width: usize,
    height: usize,
    pixel_size: f64,
    values: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum HeightMapIoError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a VHM1 height map")]
    BadMagic,
    #[error("height map payload is truncated")]
    Truncated,
}

impl HeightMap {
    pub fn from_values(width: usize, height: usize, pixel_size: f64, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), width * height, "height buffer size mismatch");
        HeightMap {
            width,
            height,
            pixel_size,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Å per pixel.
    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x + self.width * y]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Raw dump: `VHM1`, width u32, height u32, pixel_size f32, then f32 values,
    /// all little-endian.
    pub fn write_raw<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(HEIGHT_MAGIC)?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        w.write_all(&(self.pixel_size as f32).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_raw<R: Read>(mut r: R) -> Result<Self, HeightMapIoError> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[0..4] != HEIGHT_MAGIC {
            return Err(HeightMapIoError::BadMagic);
        }
        let width = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let pixel_size = f32::from_le_bytes(header[12..16].try_into().unwrap()) as f64;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 4 * width * height {
            return Err(HeightMapIoError::Truncated);
        }
        let values = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        Ok(HeightMap {
            width,
            height,
            pixel_size,
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    /// Output width and height, pixels.
    pub image_size: usize,
    pub colormap: Colormap,
    pub normalization: Normalization,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            image_size: 256,
            colormap: Colormap::Hot,
            normalization: Normalization::PerImage,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.image_size < 16 {
            return Err(format!(
                "image size {} is below the minimum of 16",
                self.image_size
            ));
        }
        if let Normalization::Fixed(m) = self.normalization {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(format!("fixed normalization height {m} must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Per-grid data shared by every view: occupied bounds and, for each
/// occupied (x, y) column, its lowest and highest occupied z.
#[derive(Debug, Clone)]
pub struct GridSummary {
    bounds: Option<([usize; 3], [usize; 3])>,
    columns: Vec<(u32, u32, u32, u32)>,
}

impl GridSummary {
    pub fn new(grid: &VoxelGrid) -> Self {
        let [nx, ny, nz] = grid.dims();
        let columns: Vec<(u32, u32, u32, u32)> = (0..ny)
            .into_par_iter()
            .flat_map_iter(|y| {
                (0..nx).filter_map(move |x| {
                    let lo = (0..nz).find(|&z| grid.get(x, y, z))?;
                    let hi = (0..nz).rev().find(|&z| grid.get(x, y, z))?;
                    Some((x as u32, y as u32, lo as u32, hi as u32))
                })
            })
            .collect();
        let bounds = grid.occupied_bounds();
        GridSummary { bounds, columns }
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    /// Lowest point of the occupied voxels (their corners included) along `axis`,
    /// measured from `center`, voxel units.
    fn lowest_along(&self, axis: Vec3, center: Vec3) -> f64 {
        let corner_reach = 0.5 * (axis.x.abs() + axis.y.abs() + axis.z.abs());
        let mut lowest = f64::INFINITY;
        for &(x, y, z0, z1) in &self.columns {
            for z in [z0, z1] {
                let c = Vec3::new(x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5) - center;
                lowest = lowest.min(c.dot(axis) - corner_reach);
            }
        }
        lowest
    }
}

/// Renders the height map of `grid` seen from above after rotating it by `r`
/// about its center. See [`render_height_map_with`] to reuse a [`GridSummary`].
pub fn render_height_map(grid: &VoxelGrid, r: &Rotation, cfg: &RenderConfig) -> HeightMap {
    render_height_map_with(grid, &GridSummary::new(grid), r, cfg)
}

/// Pixel `(i, j)` samples the rotated frame at
/// `x' = (i + ½)·p − E/2`, `y' = (j + ½)·p − E/2` with `E` the largest grid
/// side and `p = E / image_size`. Its value is the height of the first occupied
/// voxel the downward ray enters, measured from the lowest occupied point of
/// this view, or 0 on a miss.
pub fn render_height_map_with(
    grid: &VoxelGrid,
    summary: &GridSummary,
    r: &Rotation,
    cfg: &RenderConfig,
) -> HeightMap {
    let size = cfg.image_size;
    let dims = grid.dims();
    let extent = dims.iter().copied().max().unwrap() as f64;
    let pixel = extent / size as f64;
    let h = grid.voxel_size();
    let mut values = vec![0.0f64; size * size];

    let Some((lo, hi)) = summary.bounds else {
        return HeightMap::from_values(size, size, pixel * h, values);
    };

    let m = r.to_matrix();
    // rows of R are the rotated-frame axes expressed in the grid frame
    let ex = Vec3::from(m[0]);
    let ey = Vec3::from(m[1]);
    let ez = Vec3::from(m[2]);
    let center = Vec3::new(dims[0] as f64, dims[1] as f64, dims[2] as f64) * 0.5;
    let top = extent;
    let lowest = summary.lowest_along(ez, center);
    let box_lo = Vec3::new(lo[0] as f64, lo[1] as f64, lo[2] as f64);
    let box_hi = Vec3::new(hi[0] as f64 + 1.0, hi[1] as f64 + 1.0, hi[2] as f64 + 1.0);
    let dir = -ez;
    let half = 0.5 * extent;

    values
        .par_chunks_mut(size)
        .enumerate()
        .for_each(|(j, row)| {
            let yp = (j as f64 + 0.5) * pixel - half;
            for (i, out) in row.iter_mut().enumerate() {
                let xp = (i as f64 + 0.5) * pixel - half;
                let origin = center + ex * xp + ey * yp + ez * top;
                if let Some(t) = first_hit(grid, origin, dir, box_lo, box_hi, lo, hi) {
                    *out = ((top - t - lowest) * h).max(0.0);
                }
            }
        });
    HeightMap::from_values(size, size, pixel * h, values)
}

/// Ray parameter at which the ray `origin + t·dir` enters its first occupied
/// voxel inside the box `[box_lo, box_hi]` (inclusive voxel bounds `lo..=hi`).
fn first_hit(
    grid: &VoxelGrid,
    origin: Vec3,
    dir: Vec3,
    box_lo: Vec3,
    box_hi: Vec3,
    lo: [usize; 3],
    hi: [usize; 3],
) -> Option<f64> {
    // slab clip
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for a in 0..3 {
        if dir[a] == 0.0 {
            if origin[a] < box_lo[a] || origin[a] > box_hi[a] {
                return None;
            }
        } else {
            let ta = (box_lo[a] - origin[a]) / dir[a];
            let tb = (box_hi[a] - origin[a]) / dir[a];
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
        }
    }
    if t0 > t1 || t1 < 0.0 {
        return None;
    }
    let t_enter = t0.max(0.0);
    let entry = origin + dir * t_enter;

    let mut cell = [0i64; 3];
    let mut step = [0i64; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for a in 0..3 {
        let c = entry[a].floor() as i64;
        let mut c = c.clamp(lo[a] as i64, hi[a] as i64);
        if dir[a] > 0.0 {
            step[a] = 1;
            t_delta[a] = 1.0 / dir[a];
            t_max[a] = (c as f64 + 1.0 - origin[a]) / dir[a];
        } else if dir[a] < 0.0 {
            step[a] = -1;
            t_delta[a] = -1.0 / dir[a];
            // entering exactly on a lower face belongs to the voxel below
            if entry[a] == c as f64 && c > lo[a] as i64 {
                c -= 1;
            }
            t_max[a] = (c as f64 - origin[a]) / dir[a];
        }
        cell[a] = c;
    }

    let mut t_cell = t_enter;
    loop {
        if grid.get(cell[0] as usize, cell[1] as usize, cell[2] as usize) {
            return Some(t_cell);
        }
        let a = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
            0
        } else if t_max[1] <= t_max[2] {
            1
        } else {
            2
        };
        if t_max[a] > t1 {
            return None;
        }
        t_cell = t_max[a];
        cell[a] += step[a];
        if cell[a] < lo[a] as i64 || cell[a] > hi[a] as i64 {
            return None;
        }
        t_max[a] += t_delta[a];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_with(dims: [usize; 3], voxels: &[[usize; 3]]) -> VoxelGrid {
        let mut g = VoxelGrid::empty(dims, 0.5, Vec3::ZERO);
        for v in voxels {
            g.set(v[0], v[1], v[2], true);
        }
        g
    }

    fn cfg(size: usize) -> RenderConfig {
        RenderConfig {
            image_size: size,
            ..Default::default()
        }
    }

    #[test]
    fn empty_grid_renders_zero() {
        let g = VoxelGrid::empty([16, 16, 16], 1.0, Vec3::ZERO);
        let hm = render_height_map(&g, &Rotation::IDENTITY, &cfg(16));
        assert!(hm.values().iter().all(|&v| v == 0.0));
        assert_eq!(hm.pixel_size(), 1.0);
    }

    #[test]
    fn identity_column_heights() {
        // a two-voxel tower at (3, 4) resting on z = 5, and a single voxel at (10, 2, 5)
        let g = grid_with([16, 16, 16], &[[3, 4, 5], [3, 4, 6], [10, 2, 5]]);
        let hm = render_height_map(&g, &Rotation::IDENTITY, &cfg(16));
        assert_eq!(hm.get(3, 4), 2.0 * 0.5);
        assert_eq!(hm.get(10, 2), 0.5);
        assert_eq!(hm.get(0, 0), 0.0);
        assert_eq!(hm.values().iter().filter(|&&v| v > 0.0).count(), 2);
    }

    #[test]
    fn flipped_view_measures_from_new_bottom() {
        // 180° about x: the tower now hangs from the single voxel's plane
        let g = grid_with([16, 16, 16], &[[3, 4, 5], [3, 4, 6], [10, 2, 5]]);
        let r = Rotation::from_axis_angle(Vec3::new(1.0, 0.0, 0.0), std::f64::consts::PI);
        let hm = render_height_map(&g, &r, &cfg(16));
        // y flips: row 4 → row 11, row 2 → row 13
        assert!((hm.get(3, 11) - 1.0).abs() < 1e-9);
        assert!((hm.get(10, 13) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn raw_dump_round_trip() {
        let hm = HeightMap::from_values(2, 2, 0.25, vec![0.0, 1.5, 2.25, 3.0]);
        let mut buf = Vec::new();
        hm.write_raw(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 16);
        assert_eq!(&buf[..4], b"VHM1");
        assert_eq!(HeightMap::read_raw(&buf[..]).unwrap(), hm);
        assert!(matches!(
            HeightMap::read_raw(&buf[..20]),
            Err(HeightMapIoError::Truncated)
        ));
    }
}
