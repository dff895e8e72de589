//! Occupancy-grid voxelization of atoms and triangle meshes.

mod atoms;
mod fit;
mod grid;
mod mesh;

pub use atoms::{atom_spheres, rasterize_spheres, spheres_bounds, voxelize_atoms, Sphere};
pub use fit::{fit_and_pad, GridPlan, RawGrid, VoxelizeConfig, VoxelizeMode};
pub use grid::{GridIoError, VoxelGrid, GRID_MAGIC, GRID_VERSION};
pub use mesh::{
    parity_fill, rasterize_mesh, scanline_crossing, surface_voxels, tri_box_overlap, voxelize_mesh,
};

#[derive(Debug, thiserror::Error)]
pub enum VoxelError {
    #[error("invalid voxelization config: {0}")]
    InvalidConfig(String),
    #[error("nothing to voxelize")]
    NoInput,
    #[error("geometry has zero extent; cannot derive a voxel size")]
    DegenerateExtent,
    #[error("raw grid {dims:?} does not fit in {resolution}^3")]
    TooLarge { dims: [usize; 3], resolution: usize },
    #[error(
        "mesh is not watertight: {odd_rows} scanlines cross the surface an odd number of times"
    )]
    NonWatertight { odd_rows: usize },
}
