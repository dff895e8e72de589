//! Triangle-mesh voxelization: conservative surface pass plus scanline parity fill.

use rayon::prelude::*;

use crate::geometry::{TriangleMesh, Vec3};

use super::fit::{fit_and_pad, GridPlan, RawGrid, VoxelizeConfig};
use super::grid::VoxelGrid;
use super::VoxelError;

/// Voxel boxes used by the surface pass are shrunk by this fraction of the
/// voxel size, so faces lying exactly on a voxel boundary only claim the
/// voxels they actually cut.
const BOX_SHRINK: f64 = 1e-7;

/// Voxelizes `mesh` at `cfg.resolution`, scaled by the mesh bounding box.
///
/// Surface voxels come from a triangle/box overlap test; with `solid_fill` the
/// interior is then filled by +X scanline parity. A row with an odd number of
/// crossings means the mesh is not closed: under `strict` that is an error,
/// otherwise the result falls back to surface voxels only.
pub fn voxelize_mesh(mesh: &TriangleMesh, cfg: &VoxelizeConfig) -> Result<VoxelGrid, VoxelError> {
    cfg.validate()?;
    let plan = GridPlan::fit(&mesh.bbox(), cfg.content_voxels())?;
    let raw = rasterize_mesh(mesh, &plan, cfg.solid_fill, cfg.strict)?;
    fit_and_pad(&raw, cfg)
}

pub fn rasterize_mesh(
    mesh: &TriangleMesh,
    plan: &GridPlan,
    solid_fill: bool,
    strict: bool,
) -> Result<RawGrid, VoxelError> {
    let mut grid = surface_voxels(mesh, plan);
    if !solid_fill {
        return Ok(grid);
    }
    match parity_fill(mesh, plan) {
        Ok(fill) => {
            for (g, f) in grid.voxels.iter_mut().zip(&fill.voxels) {
                *g |= *f;
            }
            Ok(grid)
        }
        Err(odd_rows) if strict => Err(VoxelError::NonWatertight { odd_rows }),
        Err(odd_rows) => {
            log::warn!("mesh is not watertight ({odd_rows} scanlines with odd crossings); keeping surface voxels only");
            Ok(grid)
        }
    }
}

/// Inclusive voxel range whose boxes may touch `[lo, hi]` on one axis, padded by one.
fn box_span(lo: f64, hi: f64, origin: f64, h: f64, n: usize) -> Option<(usize, usize)> {
    let a = ((lo - origin) / h - 0.5).ceil() as i64 - 1;
    let b = ((hi - origin) / h + 0.5).floor() as i64 + 1;
    let a = a.max(0);
    let b = b.min(n as i64 - 1);
    (a <= b).then_some((a as usize, b as usize))
}

/// Voxels whose (slightly shrunk) box overlaps at least one triangle.
pub fn surface_voxels(mesh: &TriangleMesh, plan: &GridPlan) -> RawGrid {
    let [nx, ny, nz] = plan.dims;
    let h = plan.voxel_size;
    let o = plan.origin;
    let half = 0.5 * h * (1.0 - BOX_SHRINK);

    let tri_bounds: Vec<(Vec3, Vec3)> = (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.triangle(t);
            (a.min(b).min(c), a.max(b).max(c))
        })
        .collect();
    let mut by_slice: Vec<Vec<u32>> = vec![Vec::new(); nz];
    for (t, (lo, hi)) in tri_bounds.iter().enumerate() {
        if let Some((k0, k1)) = box_span(lo.z, hi.z, o.z, h, nz) {
            for slice in &mut by_slice[k0..=k1] {
                slice.push(t as u32);
            }
        }
    }

    let mut raw = RawGrid::empty(*plan);
    raw.voxels
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slice)| {
            for &t in &by_slice[k] {
                let tri = mesh.triangle(t as usize);
                let (lo, hi) = tri_bounds[t as usize];
                let Some((j0, j1)) = box_span(lo.y, hi.y, o.y, h, ny) else {
                    continue;
                };
                let Some((i0, i1)) = box_span(lo.x, hi.x, o.x, h, nx) else {
                    continue;
                };
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        let cell = &mut slice[i + nx * j];
                        if *cell == 0 && tri_box_overlap(plan.center(i, j, k), half, &tri) {
                            *cell = 1;
                        }
                    }
                }
            }
        });
    raw
}

/// Interior voxels by +X scanline parity: a voxel center is inside iff an odd
/// number of surface crossings lie at smaller x on its row.
///
/// Returns the number of rows with an odd crossing count when the mesh is not closed.
pub fn parity_fill(mesh: &TriangleMesh, plan: &GridPlan) -> Result<RawGrid, usize> {
    let [nx, ny, nz] = plan.dims;
    let h = plan.voxel_size;
    let o = plan.origin;

    // CSR table of candidate triangles per (y, z) row
    let rows = ny * nz;
    let spans: Vec<Option<[(usize, usize); 2]>> = (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.triangle(t);
            let (lo, hi) = (a.min(b).min(c), a.max(b).max(c));
            let js = box_span(lo.y, hi.y, o.y, h, ny)?;
            let ks = box_span(lo.z, hi.z, o.z, h, nz)?;
            Some([js, ks])
        })
        .collect();
    let mut start = vec![0usize; rows + 1];
    for [(j0, j1), (k0, k1)] in spans.iter().flatten() {
        for k in *k0..=*k1 {
            for j in *j0..=*j1 {
                start[j + ny * k + 1] += 1;
            }
        }
    }
    for r in 0..rows {
        start[r + 1] += start[r];
    }
    let mut fill = start.clone();
    let mut entries = vec![0u32; start[rows]];
    for (t, span) in spans.iter().enumerate() {
        let Some([(j0, j1), (k0, k1)]) = span else {
            continue;
        };
        for k in *k0..=*k1 {
            for j in *j0..=*j1 {
                let r = j + ny * k;
                entries[fill[r]] = t as u32;
                fill[r] += 1;
            }
        }
    }

    let mut raw = RawGrid::empty(*plan);
    let odd_rows: usize = raw
        .voxels
        .par_chunks_mut(nx * ny)
        .enumerate()
        .map(|(k, slice)| {
            let mut odd = 0;
            let mut xs: Vec<f64> = Vec::new();
            let zc = o.z + k as f64 * h;
            for j in 0..ny {
                let yc = o.y + j as f64 * h;
                let r = j + ny * k;
                xs.clear();
                for &t in &entries[start[r]..start[r + 1]] {
                    if let Some(x) = scanline_crossing(&mesh.triangle(t as usize), yc, zc) {
                        xs.push(x);
                    }
                }
                if xs.len() % 2 == 1 {
                    odd += 1;
                    continue;
                }
                xs.sort_by(f64::total_cmp);
                let row = &mut slice[j * nx..(j + 1) * nx];
                let mut passed = 0;
                for (i, cell) in row.iter_mut().enumerate() {
                    let xc = o.x + i as f64 * h;
                    while passed < xs.len() && xs[passed] < xc {
                        passed += 1;
                    }
                    if passed % 2 == 1 {
                        *cell = 1;
                    }
                }
            }
            odd
        })
        .sum();

    if odd_rows > 0 {
        Err(odd_rows)
    } else {
        Ok(raw)
    }
}

/// 2D edge function of `p` against the line through `u` and `v`, always evaluated from the
/// lexicographically smaller endpoint so both triangles sharing an edge get
/// bit-identical values; the flag reports whether `u → v` was already canonical.
#[inline]
fn canonical_edge(u: [f64; 2], v: [f64; 2], p: [f64; 2]) -> (f64, bool) {
    let raw =
        |u: [f64; 2], v: [f64; 2]| (v[0] - u[0]) * (p[1] - u[1]) - (v[1] - u[1]) * (p[0] - u[0]);
    if (u[0], u[1]) <= (v[0], v[1]) {
        (raw(u, v), true)
    } else {
        (raw(v, u), false)
    }
}

/// x coordinate where the +X ray through `(y, z)` crosses the triangle, if it does.
///
/// The test runs in the (y, z) projection. Points strictly inside count; a
/// point on an edge counts only for the triangle lying on the positive side of
/// the edge's canonical direction, so a ray through a shared edge or vertex is
/// counted once. Triangles parallel to the ray never count.
pub fn scanline_crossing(tri: &[Vec3; 3], y: f64, z: f64) -> Option<f64> {
    let p = [y, z];
    let q = tri.map(|v| [v.y, v.z]);
    let mut weights = [0.0f64; 3];
    // edge opposite vertex i runs from q[(i+1)%3] to q[(i+2)%3]
    for i in 0..3 {
        let (u, v, w) = (q[(i + 1) % 3], q[(i + 2) % 3], q[i]);
        let (side_w, canonical_w) = canonical_edge(u, v, w);
        if side_w == 0.0 {
            return None;
        }
        let (side_p, canonical_p) = canonical_edge(u, v, p);
        debug_assert_eq!(canonical_w, canonical_p);
        let sigma = side_w.signum();
        let s = side_p * sigma;
        if s > 0.0 {
            weights[i] = s;
        } else if side_p == 0.0 && sigma > 0.0 {
            weights[i] = 0.0;
        } else {
            return None;
        }
    }
    let sum = weights[0] + weights[1] + weights[2];
    if sum <= 0.0 {
        return None;
    }
    Some((weights[0] * tri[0].x + weights[1] * tri[1].x + weights[2] * tri[2].x) / sum)
}

/// Separating-axis triangle/box overlap test (Akenine-Möller). Touching counts as overlap.
pub fn tri_box_overlap(center: Vec3, half: f64, tri: &[Vec3; 3]) -> bool {
    let v = [tri[0] - center, tri[1] - center, tri[2] - center];
    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    let axes = [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    ];

    for edge in &e {
        for unit in &axes {
            let axis = unit.cross(*edge);
            let p = [v[0].dot(axis), v[1].dot(axis), v[2].dot(axis)];
            let rad = half * (axis.x.abs() + axis.y.abs() + axis.z.abs());
            let (lo, hi) = (p[0].min(p[1]).min(p[2]), p[0].max(p[1]).max(p[2]));
            if lo > rad || hi < -rad {
                return false;
            }
        }
    }
    // per-axis box overlap
    #[allow(clippy::needless_range_loop)]
    for a in 0..3 {
        let lo = v[0][a].min(v[1][a]).min(v[2][a]);
        let hi = v[0][a].max(v[1][a]).max(v[2][a]);
        if lo > half || hi < -half {
            return false;
        }
    }
    let normal = e[0].cross(e[1]);
    let d = -normal.dot(v[0]);
    let mut vmin = [0.0; 3];
    let mut vmax = [0.0; 3];
    for a in 0..3 {
        if normal[a] > 0.0 {
            vmin[a] = -half;
            vmax[a] = half;
        } else {
            vmin[a] = half;
            vmax[a] = -half;
        }
    }
    if normal.dot(Vec3::from(vmin)) + d > 0.0 {
        return false;
    }
    normal.dot(Vec3::from(vmax)) + d >= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [Vec3; 3] {
        [Vec3::from(a), Vec3::from(b), Vec3::from(c)]
    }

    #[test]
    fn crossing_inside_and_outside() {
        let t = tri([1.0, 0.0, 0.0], [1.0, 2.0, 0.0], [3.0, 0.0, 2.0]);
        let x = scanline_crossing(&t, 0.5, 0.5).unwrap();
        // plane through the three points: x = 1 + z
        assert!((x - 1.5).abs() < 1e-12);
        assert!(scanline_crossing(&t, 2.0, 2.0).is_none());
    }

    #[test]
    fn shared_edge_counted_once() {
        // unit square in the x = 0 plane split along its diagonal y = z
        let t1 = tri([0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 1.0]);
        let t2 = tri([0.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]);
        for p in [0.25, 0.5, 0.75] {
            let hits = [&t1, &t2]
                .iter()
                .filter(|t| scanline_crossing(t, p, p).is_some())
                .count();
            assert_eq!(hits, 1, "diagonal point {p}");
        }
        // the shared vertices as well
        for (y, z) in [(0.0, 0.0), (1.0, 1.0)] {
            let hits = [&t1, &t2]
                .iter()
                .filter(|t| scanline_crossing(t, y, z).is_some())
                .count();
            assert!(hits <= 1);
        }
    }

    #[test]
    fn fan_vertex_counted_once() {
        // six triangles around (y, z) = (0, 0)
        let ring: Vec<[f64; 3]> = (0..6)
            .map(|i| {
                let a = i as f64 * std::f64::consts::PI / 3.0 + 0.1;
                [0.3 * a.cos(), a.cos(), a.sin()]
            })
            .collect();
        let hub = [0.0, 0.0, 0.0];
        let hits = (0..6)
            .filter(|&i| {
                scanline_crossing(&tri(hub, ring[i], ring[(i + 1) % 6]), 0.0, 0.0).is_some()
            })
            .count();
        assert_eq!(hits, 1);
    }

    #[test]
    fn parallel_triangle_never_crosses() {
        let t = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(scanline_crossing(&t, 0.2, 0.0).is_none());
    }

    #[test]
    fn overlap_test_basics() {
        let t = tri([-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(tri_box_overlap(Vec3::ZERO, 0.5, &t));
        assert!(!tri_box_overlap(Vec3::new(0.0, 0.0, 0.6), 0.5, &t));
        assert!(!tri_box_overlap(Vec3::new(3.0, 0.0, 0.0), 0.5, &t));
        // box near the slanted edge but outside it
        assert!(!tri_box_overlap(Vec3::new(1.2, 0.8, 0.0), 0.2, &t));
    }

    #[test]
    fn open_triangle_strict_fails() {
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let cfg = VoxelizeConfig {
            resolution: 16,
            strict: true,
            ..Default::default()
        };
        assert!(matches!(
            voxelize_mesh(&mesh, &cfg),
            Err(VoxelError::NonWatertight { .. })
        ));
        let lenient = VoxelizeConfig {
            strict: false,
            ..cfg
        };
        let g = voxelize_mesh(&mesh, &lenient).unwrap();
        assert!(g.count_occupied() > 0);
    }
}
