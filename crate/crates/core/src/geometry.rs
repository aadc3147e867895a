//! Scalar vector/quaternion algebra for unit surface normals.
//!
//! Normals are compared on the sphere: two unit vectors are lifted to pure
//! quaternions and their transition quaternion `q1 * conj(q2)` carries the
//! dot product in its real part and the (negated) cross product in its
//! imaginary part. The angle between them is `atan2(|cross|, dot)`, which is
//! stable over the whole `[0, pi]` range, unlike `acos` near the ends or
//! `atan` of the ratio near `pi/2`.

use crate::error::{Error, Result};

/// Threshold below which a vector cannot be normalized.
pub const ZERO_NORM_EPS: f64 = 1e-12;

/// Threshold on `|w|` for a quaternion to count as pure.
pub const PURE_EPS: f64 = 1e-9;

/// Cross-product norm below which the angular gradient direction is
/// undefined (angle at exactly 0 or pi).
pub const DEGENERATE_CROSS_EPS: f64 = 1e-9;

/// A 3-vector with `f64` components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(self, rhs: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * rhs.z - self.z * rhs.y,
            y: self.z * rhs.x - self.x * rhs.z,
            z: self.x * rhs.y - self.y * rhs.x,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component access by index (0 = x, 1 = y, 2 = z).
    pub fn get(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn set(&mut self, i: usize, value: f64) {
        match i {
            0 => self.x = value,
            1 => self.y = value,
            _ => self.z = value,
        }
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::ops::AddAssign for Vec3 {
    fn add_assign(&mut self, rhs: Vec3) {
        *self = *self + rhs;
    }
}

/// A direction: a `Vec3` of unit Euclidean length (within 1e-6).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    /// Wraps a vector after renormalizing it. Errors on (near-)zero input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        normalize(Vec3::new(x, y, z))
    }

    /// Wraps a vector that is already unit length, without renormalizing.
    /// The caller is responsible for the invariant.
    pub fn from_unit_unchecked(v: Vec3) -> Self {
        UnitVec3(v)
    }

    pub fn as_vec(self) -> Vec3 {
        self.0
    }

    pub fn x(self) -> f64 {
        self.0.x
    }

    pub fn y(self) -> f64 {
        self.0.y
    }

    pub fn z(self) -> f64 {
        self.0.z
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(u: UnitVec3) -> Vec3 {
        u.0
    }
}

/// Normalizes `v` to unit length.
pub fn normalize(v: Vec3) -> Result<UnitVec3> {
    let n = v.norm();
    if n <= ZERO_NORM_EPS {
        return Err(Error::ZeroVector);
    }
    Ok(UnitVec3(v * (1.0 / n)))
}

/// A quaternion `w + x i + y j + z k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn conjugate(self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// The imaginary part as a vector.
    pub fn imaginary(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn is_pure(self) -> bool {
        self.w.abs() <= PURE_EPS
    }
}

/// Lifts a unit normal to the pure quaternion `(0, n)`.
pub fn pure_quaternion(n: UnitVec3) -> Quaternion {
    Quaternion::new(0.0, n.x(), n.y(), n.z())
}

/// Hamilton product `a * b`.
pub fn quat_multiply(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion {
        w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    }
}

/// Transition quaternion `q1 * q2^-1` between two pure unit quaternions.
///
/// For pure unit quaternions `q^-1 = q* = -q`, so the product collapses to
/// `(n1 . n2, -(n1 x n2))`: real part is the dot product of the encoded
/// normals, imaginary magnitude is the norm of their cross product.
pub fn transition_quaternion(q1: Quaternion, q2: Quaternion) -> Result<Quaternion> {
    if !q1.is_pure() {
        return Err(Error::NotPure(q1.w.abs()));
    }
    if !q2.is_pure() {
        return Err(Error::NotPure(q2.w.abs()));
    }
    Ok(quat_multiply(q1, q2.conjugate()))
}

/// Angle in radians between two unit vectors, in `[0, pi]`.
///
/// Computed as `atan2(|n1 x n2|, n1 . n2)`. The expression is evaluated with
/// the same floating-point ordering for both argument orders, so it is
/// exactly symmetric.
pub fn angular_difference(n1: UnitVec3, n2: UnitVec3) -> f64 {
    let a = n1.as_vec();
    let b = n2.as_vec();
    a.cross(b).norm().atan2(a.dot(b))
}

/// Gradient of [`angular_difference`] with respect to the first argument
/// treated as a free 3-vector.
///
/// Returns `(gradient, degenerate)`. When the cross product norm is below
/// [`DEGENERATE_CROSS_EPS`] (angle at 0 or pi) the direction is undefined;
/// the gradient is reported as zero with the flag set so optimizers never
/// see a NaN.
pub fn angular_difference_grad(n1: UnitVec3, n2: UnitVec3) -> (Vec3, bool) {
    angular_difference_grad_raw(n1.as_vec(), n2.as_vec())
}

/// As [`angular_difference_grad`], but accepts a not-exactly-unit first
/// argument. `atan2(|v x b|, v . b)` is scale invariant in `v`, which is what
/// makes finite-difference perturbations of stored normals well defined.
pub(crate) fn angular_difference_grad_raw(v: Vec3, b: Vec3) -> (Vec3, bool) {
    let c = v.cross(b);
    let s = c.norm();
    let d = v.dot(b);
    if s < DEGENERATE_CROSS_EPS {
        return (Vec3::ZERO, true);
    }
    // theta = atan2(s, d), s = |v x b|, d = v . b
    // dtheta/dv = (d * (b x c)/s - s * b) / (s^2 + d^2)
    let bs = b.cross(c) * (d / s);
    let grad = (bs - b * s) * (1.0 / (s * s + d * d));
    (grad, false)
}

pub(crate) fn angular_difference_raw(v: Vec3, b: Vec3) -> f64 {
    v.cross(b).norm().atan2(v.dot(b))
}

/// A 3x3 rotation matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3 {
    pub m: [[f64; 3]; 3],
}

impl Rotation3 {
    pub const IDENTITY: Rotation3 = Rotation3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn new(m: [[f64; 3]; 3]) -> Self {
        Rotation3 { m }
    }

    /// Rotation about the +y (up) axis carrying +z toward +x for positive
    /// angles.
    pub fn yaw(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation3::new([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    /// Rotation about the +x (right) axis carrying +z toward +y for positive
    /// angles.
    pub fn pitch(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation3::new([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])
    }

    /// Rotation by `angle` about an arbitrary unit axis (Rodrigues form).
    pub fn axis_angle(axis: UnitVec3, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let (x, y, z) = (axis.x(), axis.y(), axis.z());
        Rotation3::new([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    pub fn transpose(self) -> Rotation3 {
        let m = self.m;
        Rotation3::new([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn apply(self, v: Vec3) -> Vec3 {
        let m = self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn apply_unit(self, v: UnitVec3) -> Result<UnitVec3> {
        normalize(self.apply(v.as_vec()))
    }

    pub fn compose(self, rhs: Rotation3) -> Rotation3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Rotation3::new(out)
    }

    pub fn determinant(self) -> f64 {
        let m = self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Max absolute deviation of `R^T R` from the identity.
    pub fn orthogonality_error(self) -> f64 {
        let rt = self.transpose();
        let p = rt.compose(self);
        let mut err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((p.m[i][j] - target).abs());
            }
        }
        err
    }
}
