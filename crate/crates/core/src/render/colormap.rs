use super::heightmap::HeightMap;
use super::image::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colormap {
    /// Black → red → yellow → white in equal thirds.
    Hot,
    Gray,
}

/// How heights are scaled to `t ∈ [0, 1]` before coloring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Divide by the map's own maximum.
    PerImage,
    /// Divide by a fixed height in Å and clamp.
    Fixed(f64),
}

fn quantize(c: f64) -> u8 {
    (255.0 * c.clamp(0.0, 1.0)).round() as u8
}

/// Hot colormap at `t`: R = 3t, G = 3t − 1, B = 3t − 2, each clamped to [0, 1].
pub fn hot(t: f64) -> [u8; 3] {
    let s = 3.0 * t;
    [quantize(s), quantize(s - 1.0), quantize(s - 2.0)]
}

pub fn gray(t: f64) -> [u8; 3] {
    let v = quantize(t);
    [v, v, v]
}

impl Colormap {
    pub fn color(self, t: f64) -> [u8; 3] {
        match self {
            Colormap::Hot => hot(t),
            Colormap::Gray => gray(t),
        }
    }
}

/// Rec. 601 luma of an RGB triple.
pub fn luma(rgb: [u8; 3]) -> f64 {
    0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64
}

/// Maps heights to colors. An all-zero map stays black under per-image scaling.
pub fn apply_colormap(h: &HeightMap, colormap: Colormap, norm: Normalization) -> RgbImage {
    let scale = match norm {
        Normalization::PerImage => h.max_value(),
        Normalization::Fixed(m) => m,
    };
    let mut img = RgbImage::new(h.width(), h.height());
    for y in 0..h.height() {
        for x in 0..h.width() {
            let v = h.get(x, y);
            let t = if scale > 0.0 {
                (v / scale).clamp(0.0, 1.0)
            } else {
                0.0
            };
            img.put_pixel(x, y, colormap.color(t));
        }
    }
    img
}
