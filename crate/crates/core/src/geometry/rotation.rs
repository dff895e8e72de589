//! Unit-quaternion rotations and uniform orientation sampling.

use std::f64::consts::PI;
use std::fmt;

use super::rng::Rng;
use super::vec3::Vec3;

/// Largest deviation of |q| from 1 accepted by [`Rotation::from_wxyz`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// A rotation carried as a unit quaternion `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RotationError {
    #[error("quaternion has non-finite component")]
    NonFinite,
    #[error("quaternion norm {0} is not 1 (tolerance {UNIT_TOLERANCE})")]
    NotUnit(f64),
    #[error("quaternion has zero norm")]
    Zero,
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Accepts a quaternion that is already unit length within [`UNIT_TOLERANCE`].
    pub fn from_wxyz(q: [f64; 4]) -> Result<Self, RotationError> {
        if q.iter().any(|c| !c.is_finite()) {
            return Err(RotationError::NonFinite);
        }
        let n = norm4(q);
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(RotationError::NotUnit(n));
        }
        Ok(Rotation {
            w: q[0],
            x: q[1],
            y: q[2],
            z: q[3],
        })
    }

    /// Scales any non-zero quaternion to unit length. Returns the rotation and
    /// the original norm so callers can warn about sloppy input.
    pub fn normalized(q: [f64; 4]) -> Result<(Self, f64), RotationError> {
        if q.iter().any(|c| !c.is_finite()) {
            return Err(RotationError::NonFinite);
        }
        let n = norm4(q);
        if n == 0.0 {
            return Err(RotationError::Zero);
        }
        Ok((
            Rotation {
                w: q[0] / n,
                x: q[1] / n,
                y: q[2] / n,
                z: q[3] / n,
            },
            n,
        ))
    }

    /// Right-handed rotation by `angle` radians about `axis`.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let a = axis / axis.norm();
        let (s, c) = (0.5 * angle).sin_cos();
        Rotation {
            w: c,
            x: a.x * s,
            y: a.y * s,
            z: a.z * s,
        }
    }

    pub fn wxyz(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        norm4(self.wxyz())
    }

    pub fn inverse(&self) -> Self {
        Rotation {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// `self ∘ first`: the rotation that applies `first`, then `self`.
    pub fn compose(&self, first: &Rotation) -> Rotation {
        let (a, b) = (self, first);
        Rotation {
            w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        }
    }

    /// Row-major 3×3 rotation matrix.
    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let Rotation { w, x, y, z } = *self;
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        mat_mul_vec(&self.to_matrix(), v)
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Rotation::IDENTITY
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.w, self.x, self.y, self.z)
    }
}

fn norm4(q: [f64; 4]) -> f64 {
    (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt()
}

pub(crate) fn mat_mul_vec(m: &[[f64; 3]; 3], v: Vec3) -> Vec3 {
    Vec3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

/// Draws a rotation uniformly from SO(3) with Shoemake's subgroup construction:
/// three uniform variates u1, u2, u3 give
/// `q = (√u1·cos 2πu3, √(1−u1)·sin 2πu2, √(1−u1)·cos 2πu2, √u1·sin 2πu3)` in (w, x, y, z).
///
/// Trigonometry goes through `libm` so the result does not depend on the
/// platform math library; the final renormalization only absorbs rounding.
pub fn sample_rotation(rng: &mut Rng) -> Rotation {
    let u1 = rng.next_f64();
    let u2 = rng.next_f64();
    let u3 = rng.next_f64();
    let a = libm::sqrt(1.0 - u1);
    let b = libm::sqrt(u1);
    let (t2, t3) = (2.0 * PI * u2, 2.0 * PI * u3);
    let q = [
        b * libm::cos(t3),
        a * libm::sin(t2),
        a * libm::cos(t2),
        b * libm::sin(t3),
    ];
    // u1 ∈ [0, 1) keeps the norm strictly positive
    Rotation::normalized(q)
        .expect("Shoemake quaternion is finite and non-zero")
        .0
}

/// Maps each point to `center + R·(p − center)`.
pub fn rotate_points(points: &[Vec3], r: &Rotation, center: Vec3) -> Vec<Vec3> {
    let m = r.to_matrix();
    points
        .iter()
        .map(|&p| center + mat_mul_vec(&m, p - center))
        .collect()
}
