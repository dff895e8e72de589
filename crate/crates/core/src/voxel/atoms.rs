//! Union-of-spheres voxelization straight from atom coordinates.

use rayon::prelude::*;

use crate::geometry::{Aabb, Vec3};
use crate::structure::{vdw_radius, MolecularModel, RadiusTable};

use super::fit::{fit_and_pad, GridPlan, RawGrid, VoxelizeConfig};
use super::grid::VoxelGrid;
use super::VoxelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// One sphere per atom with radius `vdw + probe_inflation`.
pub fn atom_spheres(
    model: &MolecularModel,
    table: &RadiusTable,
    probe_inflation: f64,
) -> Vec<Sphere> {
    model
        .atoms()
        .iter()
        .map(|a| Sphere {
            center: a.position,
            radius: vdw_radius(&a.element, table) + probe_inflation,
        })
        .collect()
}

/// Box enclosing every sphere.
pub fn spheres_bounds(spheres: &[Sphere]) -> Option<Aabb> {
    let lo = Aabb::from_points(spheres.iter().map(|s| s.center - Vec3::splat(s.radius)))?;
    let hi = Aabb::from_points(spheres.iter().map(|s| s.center + Vec3::splat(s.radius)))?;
    Some(Aabb {
        min: lo.min,
        max: hi.max,
    })
}

/// Voxelizes the atoms of `model` as a union of balls and pads to `resolution³`.
///
/// A voxel is occupied iff its center lies within `vdw_radius + probe_inflation`
/// of some atom center. The voxel size is chosen so the radius-inflated box
/// spans `resolution - 2 * margin` voxels along its longest side.
pub fn voxelize_atoms(
    model: &MolecularModel,
    table: &RadiusTable,
    cfg: &VoxelizeConfig,
) -> Result<VoxelGrid, VoxelError> {
    cfg.validate()?;
    if model.is_empty() {
        return Err(VoxelError::NoInput);
    }
    let spheres = atom_spheres(model, table, cfg.probe_inflation);
    let bounds = spheres_bounds(&spheres).ok_or(VoxelError::NoInput)?;
    let plan = GridPlan::fit(&bounds, cfg.content_voxels())?;
    let raw = rasterize_spheres(&spheres, &plan);
    fit_and_pad(&raw, cfg)
}

/// Marks every voxel of `plan` whose center is inside at least one sphere.
/// Work is split over z-slices; each slice only sees the spheres crossing it.
pub fn rasterize_spheres(spheres: &[Sphere], plan: &GridPlan) -> RawGrid {
    let [nx, ny, nz] = plan.dims;
    let h = plan.voxel_size;
    let o = plan.origin;

    // voxel index range [lo, hi] whose centers may fall within `r` of `c` on one axis
    let span = |c: f64, r: f64, origin: f64, n: usize| -> Option<(usize, usize)> {
        let lo = ((c - r - origin) / h).floor() as i64;
        let hi = ((c + r - origin) / h).ceil() as i64;
        let lo = lo.max(0);
        let hi = hi.min(n as i64 - 1);
        (lo <= hi).then_some((lo as usize, hi as usize))
    };

    let mut by_slice: Vec<Vec<u32>> = vec![Vec::new(); nz];
    for (i, s) in spheres.iter().enumerate() {
        if let Some((k0, k1)) = span(s.center.z, s.radius, o.z, nz) {
            for slice in &mut by_slice[k0..=k1] {
                slice.push(i as u32);
            }
        }
    }

    let mut raw = RawGrid::empty(*plan);
    raw.voxels
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slice)| {
            let zc = o.z + k as f64 * h;
            for &si in &by_slice[k] {
                let s = spheres[si as usize];
                let r2 = s.radius * s.radius;
                let dz = zc - s.center.z;
                if dz * dz > r2 {
                    continue;
                }
                let Some((j0, j1)) = span(s.center.y, s.radius, o.y, ny) else {
                    continue;
                };
                let Some((i0, i1)) = span(s.center.x, s.radius, o.x, nx) else {
                    continue;
                };
                for j in j0..=j1 {
                    let dy = o.y + j as f64 * h - s.center.y;
                    let dyz = dy * dy + dz * dz;
                    if dyz > r2 {
                        continue;
                    }
                    let row = &mut slice[j * nx..(j + 1) * nx];
                    for (i, cell) in row.iter_mut().enumerate().take(i1 + 1).skip(i0) {
                        let dx = o.x + i as f64 * h - s.center.x;
                        if dx * dx + dyz <= r2 {
                            *cell = 1;
                        }
                    }
                }
            }
        });
    raw
}
