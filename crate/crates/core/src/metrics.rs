//! PSNR and SSIM scoring of predicted views against ground-truth renders.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::render::{decode_image, ImageError, RgbImage};

pub const REPORT_FORMAT: &str = "vafm-report/1";

/// SSIM window side, pixels.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
const PEAK: f64 = 255.0;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("image dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch {
        a: (usize, usize),
        b: (usize, usize),
    },
    #[error("image {width}x{height} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")]
    TooSmall { width: usize, height: usize },
    #[error("{0} has no same-named ground-truth image")]
    UnpairedFile(String),
    #[error("no PNG images in {}", .0.display())]
    EmptyDirectory(PathBuf),
    #[error("cannot list {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// PSNR in dB, or infinite when the images are identical.
///
/// Serialized as a JSON number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    Infinite,
}

impl Psnr {
    pub fn finite(self) -> Option<f64> {
        match self {
            Psnr::Finite(v) => Some(v),
            Psnr::Infinite => None,
        }
    }
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Psnr::Finite(v) => s.serialize_f64(*v),
            Psnr::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Psnr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Psnr::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(Psnr::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "invalid PSNR value {s:?}"
            ))),
        }
    }
}

fn check_dims(a: &RgbImage, b: &RgbImage) -> Result<(), MetricsError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricsError::DimensionMismatch {
            a: (a.width(), a.height()),
            b: (b.width(), b.height()),
        });
    }
    Ok(())
}

/// `10·log10(255² / MSE)` over every channel of every pixel.
pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<Psnr, MetricsError> {
    check_dims(a, b)?;
    let sse: u64 = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Ok(Psnr::Infinite);
    }
    let mse = sse as f64 / a.as_raw().len() as f64;
    Ok(Psnr::Finite(10.0 * (PEAK * PEAK / mse).log10()))
}

/// Rec. 601 luma plane, row-major.
pub fn luma_plane(img: &RgbImage) -> Vec<f64> {
    img.as_raw()
        .chunks_exact(3)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut g = [0.0; SSIM_WINDOW];
    let mid = (SSIM_WINDOW / 2) as f64;
    for (k, v) in g.iter_mut().enumerate() {
        let d = k as f64 - mid;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = g.iter().sum();
    g.map(|v| v / sum)
}

/// Filters `plane` with the separable window over valid positions only.
fn blur_valid(plane: &[f64], w: usize, h: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = taps
                .iter()
                .zip(&row[x..x + SSIM_WINDOW])
                .map(|(t, v)| t * v)
                .sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * horiz[(y + k) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM on luma with an 11×11 Gaussian window (σ = 1.5) over valid
/// window positions, C1 = (0.01·255)², C2 = (0.03·255)².
pub fn ssim(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(MetricsError::TooSmall {
            width: w,
            height: h,
        });
    }
    let x = luma_plane(a);
    let y = luma_plane(b);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();

    let taps = gaussian_taps();
    let mu_x = blur_valid(&x, w, h, &taps);
    let mu_y = blur_valid(&y, w, h, &taps);
    let e_xx = blur_valid(&xx, w, h, &taps);
    let e_yy = blur_valid(&yy, w, h, &taps);
    let e_xy = blur_valid(&xy, w, h, &taps);

    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let n = mu_x.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let sx = e_xx[i] - mx * mx;
            let sy = e_yy[i] - my * my;
            let sxy = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sx + sy + c2))
        })
        .sum();
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub pred: String,
    pub gt: String,
    pub psnr_db: Psnr,
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    /// Mean over finite PSNR values; `None` when every pair is identical.
    pub mean_psnr: Option<f64>,
    pub mean_ssim: f64,
    pub n_pairs: usize,
    pub n_infinite_psnr: usize,
    /// Slot for an externally computed LPIPS mean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lpips: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format: String,
    pub pairs: Vec<PairRow>,
    pub aggregates: Aggregates,
}

impl MetricsReport {
    /// Builds the report from rows already in their final order.
    pub fn from_rows(pairs: Vec<PairRow>) -> Self {
        let finite: Vec<f64> = pairs.iter().filter_map(|p| p.psnr_db.finite()).collect();
        let mean_psnr =
            (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64);
        let mean_ssim = pairs.iter().map(|p| p.ssim).sum::<f64>() / pairs.len() as f64;
        let aggregates = Aggregates {
            mean_psnr,
            mean_ssim,
            n_pairs: pairs.len(),
            n_infinite_psnr: pairs.len() - finite.len(),
            lpips: None,
        };
        MetricsReport {
            format: REPORT_FORMAT.to_string(),
            pairs,
            aggregates,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned text table: one line per pair, then the means.
    pub fn to_table(&self) -> String {
        let name_w = self
            .pairs
            .iter()
            .map(|p| p.pred.len())
            .max()
            .unwrap_or(4)
            .max(12);
        let fmt_psnr = |p: Option<f64>| p.map_or("inf".to_string(), |v| format!("{v:.2}"));
        let mut s = String::new();
        writeln!(
            s,
            "{:<name_w$}  {:>10}  {:>10}",
            "view", "PSNR (↑)", "SSIM (↑)"
        )
        .unwrap();
        for p in &self.pairs {
            writeln!(
                s,
                "{:<name_w$}  {:>10}  {:>10.4}",
                p.pred,
                fmt_psnr(p.psnr_db.finite()),
                p.ssim
            )
            .unwrap();
        }
        let a = &self.aggregates;
        let label = format!("mean of {}", a.n_pairs);
        writeln!(
            s,
            "{:<name_w$}  {:>10}  {:>10.4}",
            label,
            fmt_psnr(a.mean_psnr),
            a.mean_ssim
        )
        .unwrap();
        if a.n_infinite_psnr > 0 {
            writeln!(
                s,
                "({} identical pairs excluded from mean PSNR)",
                a.n_infinite_psnr
            )
            .unwrap();
        }
        s
    }
}

/// PNG file names in `dir`, sorted.
fn png_names(dir: &Path) -> Result<Vec<String>, MetricsError> {
    let io = |source| MetricsError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.path().is_file() && name.to_ascii_lowercase().ends_with(".png") {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

/// Scores every PNG in `pred_dir` against the same-named file in `gt_dir`.
pub fn compare_sets(pred_dir: &Path, gt_dir: &Path) -> Result<MetricsReport, MetricsError> {
    let names = png_names(pred_dir)?;
    if names.is_empty() {
        return Err(MetricsError::EmptyDirectory(pred_dir.to_path_buf()));
    }
    if let Some(missing) = names.iter().find(|n| !gt_dir.join(n).is_file()) {
        return Err(MetricsError::UnpairedFile(missing.clone()));
    }
    let rows: Result<Vec<PairRow>, MetricsError> = names
        .par_iter()
        .map(|name| {
            let pred = pred_dir.join(name);
            let gt = gt_dir.join(name);
            let a = decode_image(&pred)?;
            let b = decode_image(&gt)?;
            Ok(PairRow {
                pred: name.clone(),
                gt: name.clone(),
                psnr_db: psnr(&a, &b)?,
                ssim: ssim(&a, &b)?,
            })
        })
        .collect();
    Ok(MetricsReport::from_rows(rows?))
}
