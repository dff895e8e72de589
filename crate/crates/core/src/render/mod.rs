//! Height-map rendering, colormaps and image files.

mod colormap;
mod heightmap;
mod image;

pub use colormap::{apply_colormap, gray, hot, luma, Colormap, Normalization};
pub use heightmap::{
    render_height_map, render_height_map_with, GridSummary, HeightMap, HeightMapIoError,
    RenderConfig, HEIGHT_MAGIC,
};
pub use image::{decode_image, encode_image, ImageError, RgbImage};
