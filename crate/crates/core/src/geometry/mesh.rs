use super::vec3::{Aabb, Vec3};

/// Indexed triangle mesh, coordinates in Å.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MeshError {
    #[error("mesh has no faces")]
    NoGeometry,
    #[error("line {line}: face references vertex {index} but only {count} vertices are defined")]
    IndexOutOfRange {
        line: usize,
        index: i64,
        count: usize,
    },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

impl TriangleMesh {
    /// Validates index bounds, finiteness and non-emptiness.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::NoGeometry);
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::Malformed {
                line: 0,
                msg: format!("vertex {i} is not finite"),
            });
        }
        for t in &triangles {
            for &i in t {
                if i as usize >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        line: 0,
                        index: i as i64 + 1,
                        count: vertices.len(),
                    });
                }
            }
        }
        Ok(TriangleMesh {
            vertices,
            triangles,
        })
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied()).expect("mesh has vertices")
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Signed enclosed volume (divergence theorem); positive for outward-facing winding.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    /// Serializes as Wavefront OBJ (`v` and `f` records only).
    pub fn to_obj(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for v in &self.vertices {
            writeln!(s, "v {} {} {}", v.x, v.y, v.z).unwrap();
        }
        for t in &self.triangles {
            writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
        }
        s
    }
}

/// Reads the `v` and `f` records of a Wavefront OBJ file.
///
/// Polygons are fan-triangulated around their first vertex, negative indices
/// count back from the most recent vertex, and `v/vt/vn` style references keep
/// only the position index. Everything else (normals, texture coordinates,
/// groups, materials, comments) is ignored.
pub fn parse_obj(text: &str) -> Result<TriangleMesh, MeshError> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let mut c = [0.0f64; 3];
                for slot in &mut c {
                    let tok = fields.next().ok_or_else(|| MeshError::Malformed {
                        line: line_no,
                        msg: "vertex needs three coordinates".into(),
                    })?;
                    *slot = tok.parse().map_err(|_| MeshError::Malformed {
                        line: line_no,
                        msg: format!("bad coordinate {tok:?}"),
                    })?;
                }
                let v = Vec3::from(c);
                if !v.is_finite() {
                    return Err(MeshError::Malformed {
                        line: line_no,
                        msg: "non-finite vertex".into(),
                    });
                }
                vertices.push(v);
            }
            Some("f") => {
                let mut poly = Vec::with_capacity(4);
                for tok in fields {
                    let idx_str = tok.split('/').next().unwrap_or("");
                    let idx: i64 = idx_str.parse().map_err(|_| MeshError::Malformed {
                        line: line_no,
                        msg: format!("bad face index {tok:?}"),
                    })?;
                    poly.push(resolve_index(idx, vertices.len(), line_no)?);
                }
                if poly.len() < 3 {
                    return Err(MeshError::Malformed {
                        line: line_no,
                        msg: format!("face has {} vertices", poly.len()),
                    });
                }
                for k in 1..poly.len() - 1 {
                    triangles.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            _ => {}
        }
    }

    if triangles.is_empty() {
        return Err(MeshError::NoGeometry);
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}

fn resolve_index(idx: i64, count: usize, line: usize) -> Result<u32, MeshError> {
    let resolved = match idx {
        i if i > 0 => i - 1,
        i if i < 0 => count as i64 + i,
        _ => -1,
    };
    if resolved < 0 || resolved as usize >= count {
        return Err(MeshError::IndexOutOfRange {
            line,
            index: idx,
            count,
        });
    }
    Ok(resolved as u32)
}
