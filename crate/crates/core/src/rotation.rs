//! Rotations of the Bloch sphere in axis-angle form.
//!
//! Composition goes through unit quaternions; every public value is kept in
//! the canonical form described on [`Rotation`].

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{TOL, UNIT_TOL};
use crate::unitary::{ComplexMatrix, C64, I, ONE};

pub type Vec3 = [f64; 3];

pub const X_AXIS: Vec3 = [1.0, 0.0, 0.0];
pub const Y_AXIS: Vec3 = [0.0, 1.0, 0.0];
pub const Z_AXIS: Vec3 = [0.0, 0.0, 1.0];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// A unit quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub v: Vec3,
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, o: Quaternion) -> Quaternion {
        let c = cross(self.v, o.v);
        Quaternion {
            w: self.w * o.w - dot(self.v, o.v),
            v: [
                self.w * o.v[0] + o.w * self.v[0] + c[0],
                self.w * o.v[1] + o.w * self.v[1] + c[1],
                self.w * o.v[2] + o.w * self.v[2] + c[2],
            ],
        }
    }
}

impl Quaternion {
    pub fn conj(self) -> Quaternion {
        Quaternion { w: self.w, v: scale(self.v, -1.0) }
    }
}

/// `r(θ, n̂)`: rotation through `θ` about the unit axis `n̂`.
///
/// Canonical form: `θ ∈ [0, π]`; the identity carries axis `ẑ`; a half-turn
/// has its first coordinate exceeding `1e-12` in magnitude positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rotation {
    axis: Vec3,
    angle: f64,
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            axis: Vec3,
            angle: f64,
        }
        let raw = Raw::deserialize(d)?;
        Rotation::try_new(raw.axis, raw.angle).map_err(serde::de::Error::custom)
    }
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { axis: Z_AXIS, angle: 0.0 };

    /// Any real angle and nonzero axis; the result is canonicalized.
    pub fn new(axis: Vec3, angle: f64) -> Rotation {
        Self::try_new(axis, angle).expect("rotation axis must be a nonzero finite vector")
    }

    pub fn try_new(axis: Vec3, angle: f64) -> Result<Rotation> {
        let len = norm(axis);
        if !len.is_finite() || len < 1e-300 || !angle.is_finite() {
            return Err(Error::InvalidInput(format!("bad rotation axis {axis:?} or angle {angle}")));
        }
        let half = 0.5 * angle;
        Ok(Self::from_quaternion(Quaternion { w: half.cos(), v: scale(axis, half.sin() / len) }))
    }

    pub fn about_x(angle: f64) -> Rotation {
        Self::new(X_AXIS, angle)
    }

    pub fn about_y(angle: f64) -> Rotation {
        Self::new(Y_AXIS, angle)
    }

    pub fn about_z(angle: f64) -> Rotation {
        Self::new(Z_AXIS, angle)
    }

    pub fn from_quaternion(q: Quaternion) -> Rotation {
        let len = (q.w * q.w + dot(q.v, q.v)).sqrt();
        let (mut w, mut v) = (q.w / len, scale(q.v, 1.0 / len));
        if w < 0.0 {
            w = -w;
            v = scale(v, -1.0);
        }
        let s = norm(v);
        if s < 1e-300 {
            return Self::IDENTITY;
        }
        let mut angle = 2.0 * s.atan2(w);
        let mut axis = scale(v, 1.0 / s);
        if angle < 1e-15 {
            return Self::IDENTITY;
        }
        if (angle - PI).abs() < UNIT_TOL {
            angle = PI;
            if let Some(&lead) = axis.iter().find(|c| c.abs() > UNIT_TOL) {
                if lead < 0.0 {
                    axis = scale(axis, -1.0);
                }
            }
        }
        Rotation { axis, angle }
    }

    pub fn quaternion(&self) -> Quaternion {
        let half = 0.5 * self.angle;
        Quaternion { w: half.cos(), v: scale(self.axis, half.sin()) }
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.angle < tol
    }

    pub fn inverse(&self) -> Rotation {
        Self::from_quaternion(self.quaternion().conj())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn then_after(&self, other: &Rotation) -> Rotation {
        Self::from_quaternion(self.quaternion() * other.quaternion())
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let [x, y, z] = self.axis;
        let (s, c) = self.angle.sin_cos();
        let t = 1.0 - c;
        [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        let m = self.matrix();
        [dot(m[0], p), dot(m[1], p), dot(m[2], p)]
    }

    /// `g ∘ self ∘ g⁻¹ = r(θ, g(n̂))`.
    pub fn conjugated_by(&self, g: &Rotation) -> Rotation {
        Rotation::new(g.apply(self.axis), self.angle)
    }

    pub fn ball_point(&self) -> BallPoint {
        BallPoint { coords: scale(self.axis, self.angle) }
    }

    /// Distance in the ball picture, accounting for the antipodal
    /// identification of the boundary.
    pub fn ball_distance(&self, other: &Rotation) -> f64 {
        self.ball_point().distance(&other.ball_point())
    }

    /// Uniform random rotation (Haar measure).
    pub fn random(rng: &mut impl rand::Rng) -> Rotation {
        loop {
            let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n2: f64 = q.iter().map(|x| x * x).sum();
            if n2 > 1e-6 && n2 <= 1.0 {
                return Self::from_quaternion(Quaternion { w: q[0], v: [q[1], q[2], q[3]] });
            }
        }
    }
}

/// The rotation `r2 ∘ r1`.
pub fn compose(r1: &Rotation, r2: &Rotation) -> Rotation {
    r2.then_after(r1)
}

/// Angle of `r2⁻¹ ∘ r1` from the half-angle cosine formula.
pub fn composite_angle(r1: &Rotation, r2: &Rotation) -> f64 {
    let (h1, h2) = (0.5 * r1.angle, 0.5 * r2.angle);
    let c = h1.cos() * h2.cos() + h1.sin() * h2.sin() * dot(r1.axis, r2.axis);
    2.0 * c.abs().min(1.0).acos()
}

/// Whether `r1⁻¹ r2` is a half-turn, within `tol` in angle.
pub fn are_orthogonal(r1: &Rotation, r2: &Rotation, tol: f64) -> bool {
    (composite_angle(r1, r2) - PI).abs() < tol
}

/// The unique rotation about `±n̂` orthogonal to `r(θ, n̂)`, namely
/// `r(π − θ, −n̂)`.
pub fn orthogonal_partner_on_axis(r: &Rotation) -> Rotation {
    Rotation::new(scale(r.axis, -1.0), PI - r.angle)
}

/// The Bloch rotation of a 2×2 unitary.
pub fn q_map(u: &ComplexMatrix) -> Result<Rotation> {
    if u.dims() != (2, 2) {
        return Err(Error::DimensionMismatch(format!("expected 2x2, got {:?}", u.dims())));
    }
    u.ensure_unitary(TOL)?;
    let phase = u.determinant().sqrt();
    let v = u.scale(phase.inv());
    // v = w·1 − i(x σx + y σy + z σz)
    let w = 0.5 * v.trace().re;
    let sx = ComplexMatrix::pauli_x();
    let sy = ComplexMatrix::pauli_y();
    let sz = ComplexMatrix::pauli_z();
    let comp = |s: &ComplexMatrix| -0.5 * (s * &v).trace().im;
    let vec = [comp(&sx), comp(&sy), comp(&sz)];
    if norm(vec) < 1e-300 {
        return Ok(Rotation::IDENTITY);
    }
    Ok(Rotation::from_quaternion(Quaternion { w, v: vec }))
}

/// `phase · (cos(θ/2)·1 − i sin(θ/2) n̂·σ)`.
pub fn su2_lift(r: &Rotation, phase: C64) -> ComplexMatrix {
    let (s, c) = (0.5 * r.angle).sin_cos();
    let [x, y, z] = r.axis;
    let m = ComplexMatrix::from_rows(&[
        vec![ONE * c - I * (s * z), -I * (s * x) - ONE * (s * y)],
        vec![-I * (s * x) + ONE * (s * y), ONE * c + I * (s * z)],
    ])
    .expect("2x2");
    m.scale(phase)
}

/// A point of the closed ball of radius `π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    pub coords: Vec3,
}

impl BallPoint {
    pub fn new(coords: Vec3) -> Result<BallPoint> {
        if norm(coords) > PI + UNIT_TOL {
            return Err(Error::InvalidInput(format!("{coords:?} lies outside the ball")));
        }
        Ok(BallPoint { coords })
    }

    pub fn rotation(&self) -> Rotation {
        let r = norm(self.coords);
        if r < 1e-300 {
            Rotation::IDENTITY
        } else {
            Rotation::new(self.coords, r)
        }
    }

    /// Euclidean distance minimized over the two representatives of each
    /// rotation, so antipodal boundary points are at distance zero.
    pub fn distance(&self, other: &BallPoint) -> f64 {
        let alt = |p: Vec3| {
            let t = norm(p);
            if t < 1e-300 {
                p
            } else {
                scale(p, -(2.0 * PI - t) / t)
            }
        };
        let (a, b) = (self.coords, other.coords);
        norm(sub(a, b)).min(norm(sub(alt(a), b))).min(norm(sub(a, alt(b))))
    }
}

impl PartialEq<BallPoint> for Rotation {
    fn eq(&self, other: &BallPoint) -> bool {
        self.ball_point().distance(other) < TOL
    }
}

/// Conjugation acts on the ball as a rigid rotation.
pub fn rotate_ballpoint(g: &Rotation, p: &BallPoint) -> BallPoint {
    p.rotation().conjugated_by(g).ball_point()
}

/// CSV rows `label,x,y,z` of ball coordinates.
pub fn ball_points_csv(rotations: &[Rotation]) -> String {
    let mut out = String::from("index,x,y,z\n");
    for (i, r) in rotations.iter().enumerate() {
        let [x, y, z] = r.ball_point().coords;
        writeln!(out, "{i},{x:.12},{y:.12},{z:.12}").unwrap();
    }
    out
}
