//! End-to-end dataset generation: one structure in, N randomly oriented
//! height-map views plus a manifest out.
//!
//! Layout of a finished dataset directory:
//!
//! ```text
//! grid.vox        VAFM1 occupancy grid shared by every view
//! view_000.png    one RGB image per view
//! ...
//! manifest.json   written last; its presence means the directory is complete
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{derive_seed, parse_obj, sample_rotation, MeshError, Rng, Rotation};
use crate::render::{
    apply_colormap, render_height_map_with, Colormap, GridSummary, HeightMap, ImageError,
    Normalization, RenderConfig, RgbImage,
};
use crate::structure::{
    fetch_alphafold, parse_pdb_with, FetchConfig, FetchError, ParseOptions, PdbError, RadiusTable,
};
use crate::voxel::{
    voxelize_atoms, voxelize_mesh, GridIoError, VoxelError, VoxelGrid, VoxelizeConfig, VoxelizeMode,
};

pub const MANIFEST_FORMAT: &str = "vafm-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const GRID_FILE: &str = "grid.vox";
const MANIFEST_TMP: &str = "manifest.json.tmp";
/// Largest allowed deviation of a stored quaternion from unit norm.
const QUAT_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("invalid dataset config: {0}")]
    InvalidConfig(String),
    #[error("{} is not empty; pass overwrite to replace it", .0.display())]
    OutputNotEmpty(PathBuf),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Pdb(#[from] PdbError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Voxel(#[from] VoxelError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Grid(#[from] GridIoError),
    #[error("manifest schema error: {0}")]
    SchemaError(String),
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Where the structure comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetInput {
    Pdb(PathBuf),
    Obj(PathBuf),
    /// UniProt accession, fetched from the AlphaFold DB.
    Accession(String),
}

impl DatasetInput {
    /// Guesses the kind from a file extension: `.obj` is a mesh, anything else PDB.
    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let is_obj = path
            .extension()
            .is_some_and(|e| e.to_string_lossy().eq_ignore_ascii_case("obj"));
        if is_obj {
            DatasetInput::Obj(path)
        } else {
            DatasetInput::Pdb(path)
        }
    }

    /// The voxelization mode this input requires.
    pub fn mode(&self) -> VoxelizeMode {
        match self {
            DatasetInput::Obj(_) => VoxelizeMode::Mesh,
            _ => VoxelizeMode::Atoms,
        }
    }

    pub fn source_id(&self) -> String {
        match self {
            DatasetInput::Pdb(p) | DatasetInput::Obj(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            DatasetInput::Accession(a) => a.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub n_views: usize,
    pub seed: u64,
    /// `voxelize.mode` must match the input kind.
    pub voxelize: VoxelizeConfig,
    /// Image width and height, pixels.
    pub image_size: usize,
    pub colormap: Colormap,
    pub radii: RadiusTable,
    pub parse: ParseOptions,
    pub fetch: FetchConfig,
    /// Replace the known dataset files of a non-empty output directory.
    pub overwrite: bool,
    /// Debugging aid: every view uses the identity rotation.
    pub force_identity: bool,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_views: 25,
            seed: 0,
            voxelize: VoxelizeConfig::default(),
            image_size: 256,
            colormap: Colormap::Hot,
            radii: RadiusTable::bondi(),
            parse: ParseOptions::default(),
            fetch: FetchConfig::default(),
            overwrite: false,
            force_identity: false,
        }
    }
}

impl DatasetConfig {
    fn render_config(&self) -> RenderConfig {
        RenderConfig {
            image_size: self.image_size,
            colormap: self.colormap,
            normalization: Normalization::PerImage,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.n_views == 0 {
            return Err(DatasetError::InvalidConfig(
                "n_views must be at least 1".into(),
            ));
        }
        if self.n_views > 1000 {
            return Err(DatasetError::InvalidConfig(format!(
                "n_views {} exceeds the 3-digit file naming limit of 1000",
                self.n_views
            )));
        }
        self.voxelize.validate()?;
        self.render_config()
            .validate()
            .map_err(DatasetError::InvalidConfig)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// One height scale shared by every view of the dataset.
    Fixed,
    PerImage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationRecord {
    pub mode: NormalizationMode,
    pub max_height_angstrom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewRecord {
    pub index: usize,
    /// Unit quaternion `[w, x, y, z]`.
    pub quaternion: [f64; 4],
    pub file: String,
    pub max_height_angstrom: f64,
}

impl ViewRecord {
    /// The stored pose, bit for bit; renormalized only if it is off unit norm.
    pub fn rotation(&self) -> Rotation {
        Rotation::from_wxyz(self.quaternion)
            .or_else(|_| Rotation::normalized(self.quaternion).map(|(r, _)| r))
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewManifest {
    pub format: String,
    pub source_id: String,
    pub seed: u64,
    /// Voxel grid side.
    pub resolution: usize,
    pub n_views: usize,
    pub voxel_size_angstrom: f64,
    pub normalization: NormalizationRecord,
    pub views: Vec<ViewRecord>,
    /// Image side, pixels. Needed to regenerate a single view.
    pub image_size: usize,
    pub colormap: String,
}

pub fn view_file_name(index: usize) -> String {
    format!("view_{index:03}.png")
}

fn is_view_file_name(name: &str) -> bool {
    name.strip_prefix("view_")
        .and_then(|s| s.strip_suffix(".png"))
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

fn colormap_name(c: Colormap) -> &'static str {
    match c {
        Colormap::Hot => "hot",
        Colormap::Gray => "gray",
    }
}

pub fn parse_colormap(name: &str) -> Option<Colormap> {
    match name {
        "hot" => Some(Colormap::Hot),
        "gray" => Some(Colormap::Gray),
        _ => None,
    }
}

/// Rotation of view `index`: a uniform draw from the child stream
/// `derive_seed(seed, index)`, so each view is independent of all others.
pub fn view_rotation(seed: u64, index: usize) -> Rotation {
    sample_rotation(&mut Rng::new(derive_seed(seed, index as u64)))
}

impl ViewManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Parses and checks everything that does not need the filesystem.
    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        let m: ViewManifest =
            serde_json::from_str(text).map_err(|e| DatasetError::SchemaError(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::SchemaError(m));
        if self.format != MANIFEST_FORMAT {
            return bad(format!(
                "format {:?}, expected {MANIFEST_FORMAT:?}",
                self.format
            ));
        }
        if self.n_views == 0 || self.n_views != self.views.len() {
            return bad(format!(
                "n_views {} with {} view records",
                self.n_views,
                self.views.len()
            ));
        }
        if self.resolution == 0 || self.image_size == 0 {
            return bad("resolution and image_size must be positive".into());
        }
        if !(self.voxel_size_angstrom > 0.0 && self.voxel_size_angstrom.is_finite()) {
            return bad(format!(
                "voxel size {} must be positive",
                self.voxel_size_angstrom
            ));
        }
        if parse_colormap(&self.colormap).is_none() {
            return bad(format!("unknown colormap {:?}", self.colormap));
        }
        let max = self.normalization.max_height_angstrom;
        if !(max >= 0.0 && max.is_finite()) {
            return bad(format!("normalization height {max} must be >= 0"));
        }
        for (i, v) in self.views.iter().enumerate() {
            if v.index != i {
                return bad(format!("view record {i} has index {}", v.index));
            }
            if v.file != view_file_name(i) {
                return bad(format!(
                    "view {i} file {:?}, expected {:?}",
                    v.file,
                    view_file_name(i)
                ));
            }
            let norm = v.quaternion.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm.is_nan() || (norm - 1.0).abs() > QUAT_NORM_TOLERANCE {
                return bad(format!("view {i} quaternion has norm {norm}"));
            }
            let h = v.max_height_angstrom;
            if !(h >= 0.0 && h.is_finite()) {
                return bad(format!("view {i} height {h} must be >= 0"));
            }
            if self.normalization.mode == NormalizationMode::Fixed && h > max {
                return bad(format!(
                    "view {i} height {h} exceeds the shared maximum {max}"
                ));
            }
        }
        Ok(())
    }
}

/// A finished dataset directory.
#[derive(Debug, Clone)]
pub struct DatasetLayout {
    pub dir: PathBuf,
    pub manifest: ViewManifest,
}

impl DatasetLayout {
    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join(MANIFEST_FILE)
    }

    pub fn grid_path(&self) -> PathBuf {
        self.dir.join(GRID_FILE)
    }

    pub fn view_paths(&self) -> Vec<PathBuf> {
        self.manifest
            .views
            .iter()
            .map(|v| self.dir.join(&v.file))
            .collect()
    }
}

/// Reads and parses the input structure, then voxelizes it.
pub fn voxelize_input(
    input: &DatasetInput,
    cfg: &DatasetConfig,
) -> Result<VoxelGrid, DatasetError> {
    if input.mode() != cfg.voxelize.mode {
        return Err(DatasetError::InvalidConfig(format!(
            "{:?} input needs {:?} voxelization, config asks for {:?}",
            input,
            input.mode(),
            cfg.voxelize.mode
        )));
    }
    let read = |p: &Path| std::fs::read_to_string(p).map_err(io_err(p));
    let grid = match input {
        DatasetInput::Pdb(path) => {
            let model = parse_pdb_with(&read(path)?, &input.source_id(), &cfg.parse)?;
            voxelize_atoms(&model, &cfg.radii, &cfg.voxelize)?
        }
        DatasetInput::Accession(acc) => {
            let text = fetch_alphafold(acc, &cfg.fetch)?;
            let model = parse_pdb_with(&text, acc, &cfg.parse)?;
            voxelize_atoms(&model, &cfg.radii, &cfg.voxelize)?
        }
        DatasetInput::Obj(path) => {
            let mesh = parse_obj(&read(path)?)?;
            voxelize_mesh(&mesh, &cfg.voxelize)?
        }
    };
    Ok(grid)
}

/// Removes whatever a failed run wrote, unless disarmed.
struct Cleanup {
    dir: PathBuf,
    created_dir: bool,
    armed: bool,
}

impl Drop for Cleanup {
    fn drop(&mut self) {
        if !self.armed {
            return;
        }
        let _ = remove_dataset_files(&self.dir);
        if self.created_dir {
            let _ = std::fs::remove_dir(&self.dir);
        }
    }
}

/// Deletes the manifest first, then the grid and view images. Other files,
/// and directories of any name, are left alone.
fn remove_dataset_files(dir: &Path) -> Result<(), DatasetError> {
    for name in [MANIFEST_FILE, MANIFEST_TMP, GRID_FILE] {
        let p = dir.join(name);
        if p.is_file() {
            std::fs::remove_file(&p).map_err(io_err(&p))?;
        }
    }
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let is_file = entry.file_type().map_err(io_err(dir))?.is_file();
        if is_file && is_view_file_name(&entry.file_name().to_string_lossy()) {
            let p = entry.path();
            std::fs::remove_file(&p).map_err(io_err(&p))?;
        }
    }
    Ok(())
}

fn prepare_out_dir(out_dir: &Path, overwrite: bool) -> Result<bool, DatasetError> {
    if !out_dir.exists() {
        std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
        return Ok(true);
    }
    let non_empty = std::fs::read_dir(out_dir)
        .map_err(io_err(out_dir))?
        .next()
        .is_some();
    if non_empty {
        if !overwrite {
            return Err(DatasetError::OutputNotEmpty(out_dir.to_path_buf()));
        }
        remove_dataset_files(out_dir)?;
    }
    Ok(false)
}

/// Voxelizes `input` and writes `cfg.n_views` views to `out_dir`.
///
/// Pass 1 renders every height map (in parallel) and takes the largest height
/// over all views; pass 2 colors every view against that shared maximum and
/// encodes it. The manifest is written last, so a directory with a manifest is
/// always complete. On error, every dataset file written so far is removed.
pub fn generate_dataset(
    input: &DatasetInput,
    cfg: &DatasetConfig,
    out_dir: &Path,
) -> Result<DatasetLayout, DatasetError> {
    cfg.validate()?;
    let grid = voxelize_input(input, cfg)?;
    generate_from_grid(&grid, &input.source_id(), cfg, out_dir)
}

/// [`generate_dataset`] for an already voxelized structure.
pub fn generate_from_grid(
    grid: &VoxelGrid,
    source_id: &str,
    cfg: &DatasetConfig,
    out_dir: &Path,
) -> Result<DatasetLayout, DatasetError> {
    cfg.validate()?;
    let created_dir = prepare_out_dir(out_dir, cfg.overwrite)?;
    let mut cleanup = Cleanup {
        dir: out_dir.to_path_buf(),
        created_dir,
        armed: true,
    };

    let grid_path = out_dir.join(GRID_FILE);
    grid.save(&grid_path)?;

    let rotations: Vec<Rotation> = (0..cfg.n_views)
        .map(|i| {
            if cfg.force_identity {
                Rotation::IDENTITY
            } else {
                view_rotation(cfg.seed, i)
            }
        })
        .collect();
    let summary = GridSummary::new(grid);
    let render_cfg = cfg.render_config();
    let maps: Vec<HeightMap> = rotations
        .par_iter()
        .map(|r| render_height_map_with(grid, &summary, r, &render_cfg))
        .collect();
    let view_max: Vec<f64> = maps.iter().map(HeightMap::max_value).collect();
    let max_height = view_max.iter().copied().fold(0.0, f64::max);

    maps.par_iter()
        .enumerate()
        .try_for_each(|(i, map)| -> Result<(), DatasetError> {
            let img = apply_colormap(map, cfg.colormap, Normalization::Fixed(max_height));
            let path = out_dir.join(view_file_name(i));
            std::fs::write(&path, img.to_png()?).map_err(io_err(&path))
        })?;

    let manifest = ViewManifest {
        format: MANIFEST_FORMAT.to_string(),
        source_id: source_id.to_string(),
        seed: cfg.seed,
        resolution: cfg.voxelize.resolution,
        n_views: cfg.n_views,
        voxel_size_angstrom: grid.voxel_size(),
        normalization: NormalizationRecord {
            mode: NormalizationMode::Fixed,
            max_height_angstrom: max_height,
        },
        views: rotations
            .iter()
            .zip(&view_max)
            .enumerate()
            .map(|(i, (r, &h))| ViewRecord {
                index: i,
                quaternion: r.wxyz(),
                file: view_file_name(i),
                max_height_angstrom: h,
            })
            .collect(),
        image_size: cfg.image_size,
        colormap: colormap_name(cfg.colormap).to_string(),
    };
    write_manifest(out_dir, &manifest)?;
    cleanup.armed = false;
    log::info!(
        "wrote {} views of {source_id} to {}",
        cfg.n_views,
        out_dir.display()
    );
    Ok(DatasetLayout {
        dir: out_dir.to_path_buf(),
        manifest,
    })
}

/// Writes `manifest.json` atomically (temporary file + rename).
pub fn write_manifest(dir: &Path, manifest: &ViewManifest) -> Result<(), DatasetError> {
    let tmp = dir.join(MANIFEST_TMP);
    std::fs::write(&tmp, manifest.to_json()).map_err(io_err(&tmp))?;
    let path = dir.join(MANIFEST_FILE);
    std::fs::rename(&tmp, &path).map_err(io_err(&path))
}

/// Reads and validates `dir/manifest.json`, and checks that the grid and every
/// referenced image exist and that no unreferenced view image is present.
pub fn load_manifest(dir: &Path) -> Result<ViewManifest, DatasetError> {
    let path = dir.join(MANIFEST_FILE);
    if !path.is_file() {
        return Err(DatasetError::MissingFile(path));
    }
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let manifest = ViewManifest::from_json(&text)?;
    let grid = dir.join(GRID_FILE);
    if !grid.is_file() {
        return Err(DatasetError::MissingFile(grid));
    }
    for v in &manifest.views {
        let p = dir.join(&v.file);
        if !p.is_file() {
            return Err(DatasetError::MissingFile(p));
        }
    }
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let name = entry
            .map_err(io_err(dir))?
            .file_name()
            .to_string_lossy()
            .into_owned();
        if is_view_file_name(&name) && !manifest.views.iter().any(|v| v.file == name) {
            return Err(DatasetError::SchemaError(format!(
                "{name} is not referenced by the manifest"
            )));
        }
    }
    Ok(manifest)
}

/// Re-renders view `index` of a finished dataset from its grid, seed and shared
/// height scale alone, without touching any other view.
pub fn regenerate_view(
    dir: &Path,
    manifest: &ViewManifest,
    index: usize,
) -> Result<RgbImage, DatasetError> {
    let view = manifest
        .views
        .get(index)
        .ok_or_else(|| DatasetError::InvalidConfig(format!("no view {index}")))?;
    let grid = VoxelGrid::load(&dir.join(GRID_FILE))?;
    let colormap = parse_colormap(&manifest.colormap).ok_or_else(|| {
        DatasetError::SchemaError(format!("unknown colormap {:?}", manifest.colormap))
    })?;
    let rotation = view.rotation();
    let render_cfg = RenderConfig {
        image_size: manifest.image_size,
        colormap,
        normalization: Normalization::PerImage,
    };
    let map = render_height_map_with(&grid, &GridSummary::new(&grid), &rotation, &render_cfg);
    let norm = match manifest.normalization.mode {
        NormalizationMode::Fixed => {
            Normalization::Fixed(manifest.normalization.max_height_angstrom)
        }
        NormalizationMode::PerImage => Normalization::PerImage,
    };
    Ok(apply_colormap(&map, colormap, norm))
}
