//! `vafm`: command-line front end for the virtual AFM pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vafm::dataset::{generate_dataset, DatasetConfig, DatasetInput};
use vafm::geometry::{parse_obj, Rotation};
use vafm::metrics::compare_sets;
use vafm::render::{
    apply_colormap, encode_image, render_height_map, Colormap, Normalization, RenderConfig,
};
use vafm::structure::{fetch_alphafold, parse_pdb_with, FetchConfig, ParseOptions, RadiusTable};
use vafm::voxel::{
    atom_spheres, spheres_bounds, voxelize_atoms, voxelize_mesh, GridPlan, VoxelGrid,
    VoxelizeConfig, VoxelizeMode,
};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Parser, Debug)]
#[command(
    name = "vafm",
    version,
    about = "Virtual AFM: protein structures to multi-view height-map images"
)]
struct Cli {
    /// Master random seed (u64)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 1 gives the serial reference path (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Only print errors
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Download an AlphaFold DB model (cached under $VAFM_CACHE_DIR when set)
    Fetch {
        /// UniProt accession, e.g. P69905
        #[arg(long)]
        accession: String,
        /// Output PDB file
        #[arg(long)]
        out: PathBuf,
    },
    /// Voxelize a PDB (atoms) or OBJ (mesh) file into a VAFM1 grid
    Voxelize {
        /// Input .pdb or .obj file
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Atoms)]
        mode: ModeArg,
        #[command(flatten)]
        grid: GridArgs,
        /// Output grid file
        #[arg(long)]
        out: PathBuf,
    },
    /// Render one height-map view of a grid
    Render {
        /// VAFM1 grid file
        #[arg(long)]
        grid: PathBuf,
        /// Rotation quaternion w,x,y,z (normalized on input)
        #[arg(long, default_value = "1,0,0,0", value_parser = parse_quat, allow_hyphen_values = true)]
        quat: QuatArg,
        #[command(flatten)]
        image: ImageArgs,
        /// Color scale ceiling, Å (default: the view's own maximum height)
        #[arg(long)]
        max_height: Option<f64>,
        /// Also write raw f32 heights (VHM1) to this file
        #[arg(long)]
        heights_out: Option<PathBuf>,
        /// Output PNG
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate N randomly oriented views plus manifest.json
    Dataset {
        #[command(flatten)]
        source: SourceArgs,
        /// Number of views
        #[arg(long, default_value_t = 25, value_parser = clap::value_parser!(u64).range(1..=1000))]
        views: u64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        image: ImageArgs,
        /// Replace dataset files in a non-empty output directory
        #[arg(long)]
        overwrite: bool,
        /// Debugging aid: render every view with the identity rotation
        #[arg(long)]
        identity: bool,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted images against same-named ground-truth images
    Metrics {
        /// Directory of predicted PNGs
        #[arg(long)]
        pred: PathBuf,
        /// Directory of ground-truth PNGs
        #[arg(long)]
        gt: PathBuf,
        /// JSON report output (the table always goes to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a PDB or OBJ file
    Info {
        /// Input .pdb or .obj file
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Input .pdb or .obj file
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// UniProt accession fetched from the AlphaFold DB
    #[arg(long)]
    accession: Option<String>,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Grid side, voxels
    #[arg(long, default_value_t = 256)]
    res: usize,
    /// Probe inflation added to every van der Waals radius, Å
    #[arg(long, default_value_t = 0.0)]
    probe: f64,
    /// Empty border on each side, voxels
    #[arg(long, default_value_t = 2)]
    margin: usize,
    /// Mesh mode: keep only surface voxels
    #[arg(long)]
    surface_only: bool,
    /// Mesh mode: fail on non-watertight meshes instead of falling back to surface-only
    #[arg(long)]
    strict: bool,
    /// Include water molecules from PDB input
    #[arg(long)]
    waters: bool,
    /// Ignore HETATM records
    #[arg(long)]
    no_hetatm: bool,
}

#[derive(Args, Debug)]
struct ImageArgs {
    /// Image width and height, pixels
    #[arg(long, default_value_t = 256)]
    size: usize,
    #[arg(long, value_enum, default_value_t = ColormapArg::Hot)]
    colormap: ColormapArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Atoms,
    Mesh,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ColormapArg {
    Hot,
    Gray,
}

impl From<ColormapArg> for Colormap {
    fn from(c: ColormapArg) -> Self {
        match c {
            ColormapArg::Hot => Colormap::Hot,
            ColormapArg::Gray => Colormap::Gray,
        }
    }
}

impl GridArgs {
    fn config(&self, mode: VoxelizeMode) -> VoxelizeConfig {
        VoxelizeConfig {
            resolution: self.res,
            mode,
            probe_inflation: self.probe,
            margin: self.margin,
            solid_fill: !self.surface_only,
            strict: self.strict,
        }
    }

    fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            include_hetatm: !self.no_hetatm,
            include_waters: self.waters,
        }
    }
}

/// A `--quat` value: the normalized rotation plus the norm it was given with.
#[derive(Clone, Debug)]
struct QuatArg {
    rotation: Rotation,
    norm: f64,
}

fn parse_quat(s: &str) -> Result<QuatArg, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("{p:?} is not a number"))
        })
        .collect::<Result<_, _>>()?;
    let q: [f64; 4] = parts.try_into().map_err(|v: Vec<f64>| {
        format!("expected 4 comma-separated values w,x,y,z, got {}", v.len())
    })?;
    let (rotation, norm) = Rotation::normalized(q).map_err(|e| e.to_string())?;
    Ok(QuatArg { rotation, norm })
}

fn is_obj(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("obj"))
}

fn read_text(path: &Path) -> Result<String, BoxError> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

/// Usage problems found after parsing; reported with exit code 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> BoxError {
    Box::new(UsageError(msg.into()))
}

fn say(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        println!("{}", msg.as_ref());
    }
}

fn run(cli: Cli) -> Result<(), BoxError> {
    let quiet = cli.quiet;
    match cli.command {
        Command::Fetch { accession, out } => {
            let text = fetch_alphafold(&accession, &FetchConfig::from_env())?;
            std::fs::write(&out, &text)
                .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            say(
                quiet,
                format!("wrote {} ({} bytes)", out.display(), text.len()),
            );
        }
        Command::Voxelize {
            input,
            mode,
            grid,
            out,
        } => {
            let mode = match mode {
                ModeArg::Atoms => VoxelizeMode::Atoms,
                ModeArg::Mesh => VoxelizeMode::Mesh,
            };
            let cfg = grid.config(mode);
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let g = match mode {
                VoxelizeMode::Atoms => {
                    let id = input
                        .file_stem()
                        .unwrap_or_default()
                        .to_string_lossy()
                        .into_owned();
                    let model = parse_pdb_with(&read_text(&input)?, &id, &grid.parse_options())?;
                    voxelize_atoms(&model, &RadiusTable::bondi(), &cfg)?
                }
                VoxelizeMode::Mesh => voxelize_mesh(&parse_obj(&read_text(&input)?)?, &cfg)?,
            };
            g.save(&out)?;
            let [nx, ny, nz] = g.dims();
            say(
                quiet,
                format!(
                    "wrote {}: {nx}x{ny}x{nz} voxels of {:.4} Å, {} occupied",
                    out.display(),
                    g.voxel_size(),
                    g.count_occupied()
                ),
            );
        }
        Command::Render {
            grid,
            quat,
            image,
            max_height,
            heights_out,
            out,
        } => {
            let normalization = max_height.map_or(Normalization::PerImage, Normalization::Fixed);
            let cfg = RenderConfig {
                image_size: image.size,
                colormap: image.colormap.into(),
                normalization,
            };
            cfg.validate().map_err(usage)?;
            let g = VoxelGrid::load(&grid)?;
            if (quat.norm - 1.0).abs() > 1e-6 {
                log::warn!(
                    "quaternion had norm {}; normalized to {}",
                    quat.norm,
                    quat.rotation
                );
            }
            let map = render_height_map(&g, &quat.rotation, &cfg);
            if let Some(path) = heights_out {
                let f = std::fs::File::create(&path)
                    .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
                map.write_raw(std::io::BufWriter::new(f))?;
            }
            encode_image(&apply_colormap(&map, cfg.colormap, cfg.normalization), &out)?;
            say(
                quiet,
                format!(
                    "wrote {} (max height {:.3} Å)",
                    out.display(),
                    map.max_value()
                ),
            );
        }
        Command::Dataset {
            source,
            views,
            grid,
            image,
            overwrite,
            identity,
            out,
        } => {
            let input = match (source.input, source.accession) {
                (Some(p), None) => DatasetInput::from_path(p),
                (None, Some(a)) => DatasetInput::Accession(a),
                _ => return Err(usage("exactly one of --in and --accession is required")),
            };
            let cfg = DatasetConfig {
                n_views: views as usize,
                seed: cli.seed,
                voxelize: grid.config(input.mode()),
                image_size: image.size,
                colormap: image.colormap.into(),
                parse: grid.parse_options(),
                fetch: FetchConfig::from_env(),
                overwrite,
                force_identity: identity,
                ..Default::default()
            };
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let layout = generate_dataset(&input, &cfg, &out)?;
            let m = &layout.manifest;
            say(
                quiet,
                format!(
                    "wrote {} views of {} to {} (voxel {:.4} Å, max height {:.3} Å)",
                    m.n_views,
                    m.source_id,
                    out.display(),
                    m.voxel_size_angstrom,
                    m.normalization.max_height_angstrom
                ),
            );
        }
        Command::Metrics { pred, gt, out } => {
            let report = compare_sets(&pred, &gt)?;
            if let Some(path) = out {
                std::fs::write(&path, report.to_json())
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            if !quiet {
                print!("{}", report.to_table());
            }
        }
        Command::Info { input, grid } => {
            let cfg = grid.config(if is_obj(&input) {
                VoxelizeMode::Mesh
            } else {
                VoxelizeMode::Atoms
            });
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let text = read_text(&input)?;
            let bounds = if is_obj(&input) {
                let mesh = parse_obj(&text)?;
                println!("mesh        {}", input.display());
                println!("vertices    {}", mesh.vertices.len());
                println!("triangles   {}", mesh.triangles.len());
                println!("volume      {:.3} Å³ (signed)", mesh.signed_volume());
                mesh.bbox()
            } else {
                let model = parse_pdb_with(&text, "", &grid.parse_options())?;
                let atoms = model.atoms();
                let hetero = atoms.iter().filter(|a| a.hetero).count();
                let chains: BTreeSet<char> = atoms.iter().map(|a| a.chain_id).collect();
                let residues: BTreeSet<(char, i32)> =
                    atoms.iter().map(|a| (a.chain_id, a.residue_seq)).collect();
                let elements: BTreeSet<&str> = atoms.iter().map(|a| a.element.as_str()).collect();
                println!("structure   {}", input.display());
                println!(
                    "atoms       {} ({} ATOM, {} HETATM)",
                    atoms.len(),
                    atoms.len() - hetero,
                    hetero
                );
                println!("chains      {}", chains.iter().collect::<String>());
                println!("residues    {}", residues.len());
                println!(
                    "elements    {}",
                    elements.into_iter().collect::<Vec<_>>().join(" ")
                );
                let spheres = atom_spheres(&model, &RadiusTable::bondi(), cfg.probe_inflation);
                spheres_bounds(&spheres).expect("a parsed model has atoms")
            };
            let e = bounds.extent();
            println!(
                "bbox min    {:.3} {:.3} {:.3} Å",
                bounds.min.x, bounds.min.y, bounds.min.z
            );
            println!(
                "bbox max    {:.3} {:.3} {:.3} Å",
                bounds.max.x, bounds.max.y, bounds.max.z
            );
            println!("extent      {:.3} x {:.3} x {:.3} Å", e.x, e.y, e.z);
            let plan = GridPlan::fit(&bounds, cfg.content_voxels())?;
            println!(
                "voxel size  {:.4} Å at --res {} --margin {} (raw grid {}x{}x{})",
                plan.voxel_size,
                cfg.resolution,
                cfg.margin,
                plan.dims[0],
                plan.dims[1],
                plan.dims[2]
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Warn
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("VAFM_LOG")
        .init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}\n\nFor more information, try '--help'.");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
