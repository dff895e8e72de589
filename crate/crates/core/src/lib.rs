//! Virtual atomic force microscopy.
//!
//! Turns protein structures (PDB text, AlphaFold DB accessions, or OBJ surface
//! meshes) into sets of AFM-like height-map images seen from random
//! orientations, and scores image sets against each other with PSNR and SSIM.
//!
//! The pipeline is
//! [`structure`] → [`voxel`] (256³ occupancy grid) → [`render`] (top-down
//! orthographic ray casting, hot colormap, PNG) → [`dataset`] (N views plus a
//! manifest), with [`metrics`] for evaluation.

pub mod dataset;
pub mod geometry;
pub mod metrics;
pub mod render;
pub mod structure;
pub mod voxel;
