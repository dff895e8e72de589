//! Vectors, rotations, deterministic randomness and triangle meshes.

mod mesh;
mod rng;
mod rotation;
mod vec3;

pub use mesh::{parse_obj, MeshError, TriangleMesh};
pub use rng::{derive_seed, splitmix64_mix, Rng};
pub use rotation::{rotate_points, sample_rotation, Rotation, RotationError, UNIT_TOLERANCE};
pub use vec3::{Aabb, Vec3};
