//! Fixtures and brute-force reference implementations shared by the
//! integration tests. Nothing here calls into the code paths it checks.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use vafm::geometry::{rotate_points, Rng, Rotation, TriangleMesh, Vec3};
use vafm::render::RgbImage;
use vafm::structure::{Atom, MolecularModel};
use vafm::voxel::{GridPlan, VoxelGrid};

pub fn fixture(name: &str) -> PathBuf {
    // resolves from either crate, so the CLI tests can share these helpers
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

/// Synthetic three-helix bundle in AlphaFold DB file layout.
pub const AF_FIXTURE: &str = "af_style_bundle.pdb";

// ---------------------------------------------------------------- structures

pub fn carbon(serial: i64, p: Vec3) -> Atom {
    Atom {
        serial,
        name: "C".into(),
        element: "C".into(),
        position: p,
        occupancy: 1.0,
        alt_loc: None,
        residue_name: "UNK".into(),
        chain_id: 'A',
        residue_seq: 1,
        hetero: false,
    }
}

pub fn carbon_model(centers: &[Vec3]) -> MolecularModel {
    let atoms = centers
        .iter()
        .enumerate()
        .map(|(i, &p)| carbon(i as i64 + 1, p))
        .collect();
    MolecularModel::new(atoms, "carbons").unwrap()
}

/// Small irregular blob of carbon atoms (radius 1.70 Å each).
pub fn blob_centers() -> Vec<Vec3> {
    vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.52, 0.31, -0.20),
        Vec3::new(2.41, 1.48, 0.37),
        Vec3::new(1.10, 2.64, 0.92),
        Vec3::new(-0.63, 1.77, 1.45),
        Vec3::new(3.90, 1.21, -0.86),
    ]
}

// ---------------------------------------------------------------- meshes

pub fn transform_mesh(mesh: &TriangleMesh, r: &Rotation, offset: Vec3) -> TriangleMesh {
    let verts = rotate_points(&mesh.vertices, r, Vec3::ZERO)
        .into_iter()
        .map(|v| v + offset)
        .collect();
    TriangleMesh::new(verts, mesh.triangles.clone()).unwrap()
}

/// Axis-aligned cube `[lo, lo + side]³`, outward winding.
pub fn cube_mesh(lo: Vec3, side: f64) -> TriangleMesh {
    let v = (0..8)
        .map(|i| {
            lo + Vec3::new(
                side * (i & 1) as f64,
                side * ((i >> 1) & 1) as f64,
                side * ((i >> 2) & 1) as f64,
            )
        })
        .collect();
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let tris = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    TriangleMesh::new(v, tris).unwrap()
}

/// Subdivided icosahedron with vertices on the sphere, outward winding.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: usize) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| {
        let v = Vec3::from(*p);
        v / v.norm()
    })
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Vec3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = (verts[a as usize] + verts[b as usize]) * 0.5;
                verts.push(m / m.norm());
                verts.len() as u32 - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts.into_iter().map(|v| center + v * radius).collect();
    TriangleMesh::new(verts, faces).unwrap()
}

/// Signed distance to a union of balls (negative inside).
pub fn union_sdf(centers: &[Vec3], radius: f64) -> impl Fn(Vec3) -> f64 + '_ {
    move |p| {
        centers
            .iter()
            .map(|c| p.distance(*c) - radius)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Closed surface `{sdf = 0}` by marching tetrahedra on a cubic lattice with
/// the Freudenthal split (six tetrahedra per cell sharing the main diagonal).
/// Edge vertices are keyed by lattice edge, so neighbouring cells share them
/// exactly and the result is watertight. Lattice values of exactly zero count
/// as outside.
pub fn marching_tetrahedra(
    sdf: impl Fn(Vec3) -> f64,
    lo: Vec3,
    n: [usize; 3],
    cell: f64,
) -> TriangleMesh {
    let [nx, ny, nz] = [n[0] + 1, n[1] + 1, n[2] + 1];
    let id = |x: usize, y: usize, z: usize| x + nx * (y + ny * z);
    let pos = |i: usize| {
        let (x, y, z) = (i % nx, (i / nx) % ny, i / (nx * ny));
        lo + Vec3::new(x as f64, y as f64, z as f64) * cell
    };
    let values: Vec<f64> = (0..nx * ny * nz).map(|i| sdf(pos(i))).collect();
    let inside = |i: usize| values[i] < 0.0;

    let mut verts: Vec<Vec3> = Vec::new();
    let mut edge_vert: HashMap<(usize, usize), u32> = HashMap::new();
    let mut crossing = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> u32 {
        let (a, b) = (a.min(b), a.max(b));
        *edge_vert.entry((a, b)).or_insert_with(|| {
            let (va, vb) = (values[a], values[b]);
            let t = va / (va - vb);
            verts.push(pos(a) + (pos(b) - pos(a)) * t);
            verts.len() as u32 - 1
        })
    };
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tris: Vec<[u32; 3]> = Vec::new();
    for z in 0..n[2] {
        for y in 0..n[1] {
            for x in 0..n[0] {
                for p in perms {
                    let mut c = [x, y, z];
                    let mut tet = [id(c[0], c[1], c[2]); 4];
                    for (k, &axis) in p.iter().enumerate() {
                        c[axis] += 1;
                        tet[k + 1] = id(c[0], c[1], c[2]);
                    }
                    let (ins, outs): (Vec<usize>, Vec<usize>) =
                        tet.iter().partition(|&&v| inside(v));
                    let in_c =
                        ins.iter().fold(Vec3::ZERO, |s, &v| s + pos(v)) / ins.len().max(1) as f64;
                    let out_c =
                        outs.iter().fold(Vec3::ZERO, |s, &v| s + pos(v)) / outs.len().max(1) as f64;
                    let mut emit = |t: [u32; 3], verts: &Vec<Vec3>| {
                        let [a, b, c] = t.map(|i| verts[i as usize]);
                        let n = (b - a).cross(c - a);
                        tris.push(if n.dot(out_c - in_c) >= 0.0 {
                            t
                        } else {
                            [t[0], t[2], t[1]]
                        });
                    };
                    match (ins.len(), outs.len()) {
                        (1, 3) | (3, 1) => {
                            let (lone, others) = if ins.len() == 1 {
                                (ins[0], &outs)
                            } else {
                                (outs[0], &ins)
                            };
                            let t = [
                                crossing(lone, others[0], &mut verts),
                                crossing(lone, others[1], &mut verts),
                                crossing(lone, others[2], &mut verts),
                            ];
                            emit(t, &verts);
                        }
                        (2, 2) => {
                            let ac = crossing(ins[0], outs[0], &mut verts);
                            let ad = crossing(ins[0], outs[1], &mut verts);
                            let bd = crossing(ins[1], outs[1], &mut verts);
                            let bc = crossing(ins[1], outs[0], &mut verts);
                            emit([ac, ad, bd], &verts);
                            emit([ac, bd, bc], &verts);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    TriangleMesh::new(verts, tris).unwrap()
}

/// Union-of-balls surface around `centers`, lattice spacing `cell`.
pub fn union_mesh(centers: &[Vec3], radius: f64, cell: f64) -> TriangleMesh {
    let lo = centers
        .iter()
        .fold(Vec3::splat(f64::INFINITY), |m, c| m.min(*c))
        - Vec3::splat(radius + 2.0 * cell);
    let hi = centers
        .iter()
        .fold(Vec3::splat(f64::NEG_INFINITY), |m, c| m.max(*c))
        + Vec3::splat(radius + 2.0 * cell);
    let ext = hi - lo;
    let n = [0, 1, 2].map(|a| (ext[a] / cell).ceil() as usize);
    // irrational offset keeps lattice points off the sphere surfaces
    let lo = lo + Vec3::new(0.0123, 0.0071, 0.0037) * cell;
    marching_tetrahedra(union_sdf(centers, radius), lo, n, cell)
}

// ---------------------------------------------------------------- geometry oracles

/// Point-in-mesh by counting Möller–Trumbore hits of the +X ray from `p`.
pub fn point_in_mesh(mesh: &TriangleMesh, p: Vec3) -> bool {
    let dir = Vec3::new(1.0, 0.0, 0.0);
    let mut hits = 0;
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle(t);
        let e1 = b - a;
        let e2 = c - a;
        let pv = dir.cross(e2);
        let det = e1.dot(pv);
        if det.abs() < 1e-300 {
            continue;
        }
        let inv = 1.0 / det;
        let tv = p - a;
        let u = tv.dot(pv) * inv;
        if !(0.0..=1.0).contains(&u) {
            continue;
        }
        let qv = tv.cross(e1);
        let v = dir.dot(qv) * inv;
        if v < 0.0 || u + v > 1.0 {
            continue;
        }
        if e2.dot(qv) * inv > 0.0 {
            hits += 1;
        }
    }
    hits % 2 == 1
}

/// Per-voxel point-in-mesh classification of every center of `plan`.
pub fn brute_force_fill(mesh: &TriangleMesh, plan: &GridPlan) -> Vec<u8> {
    let [nx, ny, nz] = plan.dims;
    let mut out = vec![0u8; nx * ny * nz];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                out[x + nx * (y + ny * z)] = point_in_mesh(mesh, plan.center(x, y, z)) as u8;
            }
        }
    }
    out
}

/// Every occupied voxel, as integer coordinates.
pub fn occupied(grid: &VoxelGrid) -> Vec<[usize; 3]> {
    let [nx, ny, nz] = grid.dims();
    let mut v = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if grid.get(x, y, z) {
                    v.push([x, y, z]);
                }
            }
        }
    }
    v
}

/// Does the downward ray of pixel (i, j) pass through any occupied voxel?
/// Tests the ray against every occupied voxel box with an open slab test.
pub fn projection_oracle(grid: &VoxelGrid, r: &Rotation, size: usize) -> Vec<bool> {
    let dims = grid.dims();
    let e = *dims.iter().max().unwrap() as f64;
    let p = e / size as f64;
    let m = r.to_matrix();
    let (ex, ey, ez) = (Vec3::from(m[0]), Vec3::from(m[1]), Vec3::from(m[2]));
    let center = Vec3::new(dims[0] as f64, dims[1] as f64, dims[2] as f64) * 0.5;
    let voxels = occupied(grid);
    let mut out = vec![false; size * size];
    for j in 0..size {
        for i in 0..size {
            let xp = (i as f64 + 0.5) * p - e / 2.0;
            let yp = (j as f64 + 0.5) * p - e / 2.0;
            // a line parallel to ez through the pixel point
            let o = center + ex * xp + ey * yp;
            out[i + size * j] = voxels.iter().any(|v| {
                let mut t0 = f64::NEG_INFINITY;
                let mut t1 = f64::INFINITY;
                for a in 0..3 {
                    let lo = v[a] as f64;
                    let hi = lo + 1.0;
                    if ez[a] == 0.0 {
                        if o[a] <= lo || o[a] >= hi {
                            return false;
                        }
                    } else {
                        let ta = (lo - o[a]) / ez[a];
                        let tb = (hi - o[a]) / ez[a];
                        t0 = t0.max(ta.min(tb));
                        t1 = t1.min(ta.max(tb));
                    }
                }
                t0 < t1
            });
        }
    }
    out
}

/// Height of the topmost occupied voxel of every (x, y) column above the
/// lowest occupied z plane, Å. Requires a cubic grid; pixel (i, j) = column (i, j).
pub fn axis_aligned_heights(grid: &VoxelGrid) -> Vec<f64> {
    let [nx, ny, nz] = grid.dims();
    assert!(nx == ny && ny == nz);
    let mut zmin = usize::MAX;
    let mut tops = vec![None; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            for z in 0..nz {
                if grid.get(x, y, z) {
                    zmin = zmin.min(z);
                    tops[x + nx * y] = Some(z);
                }
            }
        }
    }
    tops.iter()
        .map(|t| t.map_or(0.0, |z| (z + 1 - zmin) as f64 * grid.voxel_size()))
        .collect()
}

// ---------------------------------------------------------------- statistics

/// One-sample Kolmogorov–Smirnov statistic against `cdf`.
pub fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------- images

pub fn random_image(rng: &mut Rng, w: usize, h: usize) -> RgbImage {
    RgbImage::from_raw(
        w,
        h,
        (0..w * h * 3)
            .map(|_| (rng.next_u64() >> 56) as u8)
            .collect(),
    )
}

pub fn rotate_image_90(img: &RgbImage) -> RgbImage {
    let (w, h) = (img.width(), img.height());
    let mut out = RgbImage::new(h, w);
    for y in 0..h {
        for x in 0..w {
            out.put_pixel(h - 1 - y, x, img.pixel(x, y));
        }
    }
    out
}

/// 10·log10(255²/MSE) by a plain double loop; `None` for identical images.
pub fn psnr_oracle(a: &RgbImage, b: &RgbImage) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0.0;
    for y in 0..a.height() {
        for x in 0..a.width() {
            let (p, q) = (a.pixel(x, y), b.pixel(x, y));
            for c in 0..3 {
                let d = p[c] as f64 - q[c] as f64;
                sum += d * d;
                n += 1.0;
            }
        }
    }
    (sum > 0.0).then(|| 10.0 * (255.0 * 255.0 / (sum / n)).log10())
}

/// SSIM by direct 11×11 weighted summation over every valid window, with
/// two-pass (centered) variance and covariance.
pub fn ssim_oracle(a: &RgbImage, b: &RgbImage) -> f64 {
    const R: i64 = 5;
    let sigma = 1.5f64;
    let mut w = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for dy in -R..=R {
        for dx in -R..=R {
            let v = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
            w[(dy + R) as usize][(dx + R) as usize] = v;
            total += v;
        }
    }
    let luma = |img: &RgbImage, x: usize, y: usize| {
        let p = img.pixel(x, y);
        0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
    };
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let (iw, ih) = (a.width(), a.height());
    let mut acc = 0.0;
    let mut count = 0.0;
    for cy in 5..ih - 5 {
        for cx in 5..iw - 5 {
            let mut mx = 0.0;
            let mut my = 0.0;
            for ky in 0..11 {
                for kx in 0..11 {
                    let wt = w[ky][kx] / total;
                    mx += wt * luma(a, cx + kx - 5, cy + ky - 5);
                    my += wt * luma(b, cx + kx - 5, cy + ky - 5);
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for ky in 0..11 {
                for kx in 0..11 {
                    let wt = w[ky][kx] / total;
                    let dx = luma(a, cx + kx - 5, cy + ky - 5) - mx;
                    let dy = luma(b, cx + kx - 5, cy + ky - 5) - my;
                    vx += wt * dx * dx;
                    vy += wt * dy * dy;
                    cxy += wt * dx * dy;
                }
            }
            acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1.0;
        }
    }
    acc / count
}

// ---------------------------------------------------------------- files

/// Relative path → contents for every file under `dir`.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
