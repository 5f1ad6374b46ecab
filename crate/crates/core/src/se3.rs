//! Rigid-body geometry on SO(3) and SE(3).
//!
//! Rotations are stored as 3×3 matrices and poses as (rotation, translation)
//! pairs, so composing poses is literal matrix multiplication. Tangent vectors
//! ([`Twist`]) order the rotational part first and the translational part
//! second.
//!
//! The exponential and logarithm maps use the closed-form Rodrigues
//! expressions together with the left Jacobian `V` that couples rotation into
//! translation. Below [`SMALL_ANGLE`] the trigonometric coefficients switch to
//! 4th-order Taylor series.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// Rotation angle below which Taylor expansions replace the closed forms.
pub const SMALL_ANGLE: f64 = 1e-7;

/// `log_map` refuses rotations whose angle is within this margin of π.
pub const NEAR_PI_MARGIN: f64 = 1e-6;

const KARCHER_TOLERANCE: f64 = 1e-10;
const KARCHER_MAX_ITERATIONS: usize = 100;
const KARCHER_ACCEPT: f64 = 1e-6;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("rotation angle {angle} is within {NEAR_PI_MARGIN} of pi; logarithm is not unique")]
    AngleNearPi { angle: f64 },
    /// The Karcher iteration hit its cap. `last` is the final iterate.
    #[error("rotation averaging did not converge (update norm {update_norm:e} after {iterations} iterations)")]
    NonConvergence {
        iterations: usize,
        update_norm: f64,
        last: Rotation,
    },
    #[error("rotation averaging needs at least one rotation")]
    Empty,
    #[error("{rotations} rotations but {weights} weights")]
    LengthMismatch { rotations: usize, weights: usize },
    #[error("matrix is not a rotation (orthonormality error {orthonormality:e}, det {det})")]
    NotARotation { orthonormality: f64, det: f64 },
}

/// Skew-symmetric matrix `[v]ₓ` such that `[v]ₓ w = v × w`.
pub fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`] applied to the antisymmetric part of `m`.
fn vee_antisym(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)])
}

/// Element of SO(3).
#[derive(Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl fmt::Debug for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rotation({:?})", self.0.as_slice())
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix after checking `‖RᵀR − I‖_F < 1e-9` and `det R = 1 ± 1e-9`.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, GeometryError> {
        let orthonormality = (m.transpose() * m - Matrix3::identity()).norm();
        let det = m.determinant();
        if orthonormality < 1e-9 && (det - 1.0).abs() < 1e-9 {
            Ok(Self(m))
        } else {
            Err(GeometryError::NotARotation { orthonormality, det })
        }
    }

    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Rodrigues' formula for an axis-angle vector.
    pub fn exp(omega: &Vector3<f64>) -> Self {
        let (a, b, _) = rodrigues_coefficients(omega.norm());
        let k = hat(omega);
        Self(Matrix3::identity() + k * a + k * k * b)
    }

    /// Axis-angle vector with angle in `[0, π − NEAR_PI_MARGIN]`.
    pub fn log(&self) -> Result<Vector3<f64>, GeometryError> {
        let angle = self.angle();
        if angle > PI - NEAR_PI_MARGIN {
            return Err(GeometryError::AngleNearPi { angle });
        }
        Ok(self.log_unchecked())
    }

    /// Logarithm that also accepts rotations at or near π, where the branch
    /// is picked from the symmetric part of the matrix.
    pub(crate) fn log_unchecked(&self) -> Vector3<f64> {
        let r = &self.0;
        let axis_sin = vee_antisym(r) * 0.5;
        let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let sin = axis_sin.norm();
        let angle = sin.atan2(cos);
        if angle < SMALL_ANGLE {
            // θ/sinθ ≈ 1 + θ²/6
            return axis_sin * (1.0 + angle * angle / 6.0);
        }
        if angle < PI - 1e-2 {
            return axis_sin * (angle / sin);
        }
        // Near π, sinθ carries little information; take the axis from
        // (R + Rᵀ)/2 − cosθ·I = (1 − cosθ)·a·aᵀ.
        let sym = (r + r.transpose()) * 0.5 - Matrix3::identity() * cos;
        let (mut col, mut best) = (0, sym[(0, 0)]);
        for i in 1..3 {
            if sym[(i, i)] > best {
                col = i;
                best = sym[(i, i)];
            }
        }
        let mut axis = sym.column(col).into_owned();
        axis /= axis.norm();
        if axis.dot(&axis_sin) < 0.0 {
            axis = -axis;
        }
        axis * angle
    }

    /// Rotation angle in radians, in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let sin = (vee_antisym(&self.0) * 0.5).norm();
        let cos = (self.0.trace() - 1.0) * 0.5;
        sin.atan2(cos)
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        Self::exp(&(axis.normalize() * angle))
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::exp(&Vector3::new(angle, 0.0, 0.0))
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::exp(&Vector3::new(0.0, angle, 0.0))
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::exp(&Vector3::new(0.0, 0.0, angle))
    }

    /// `Ry(yaw)·Rx(pitch)·Rz(roll)`.
    ///
    /// With the camera convention used throughout the crate (+z forward,
    /// +y down) the world vertical axis is y, so yaw turns the camera about
    /// the vertical, pitch tilts it up/down and roll spins it about the
    /// optical axis.
    pub fn from_yaw_pitch_roll(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self::rot_y(yaw) * Self::rot_x(pitch) * Self::rot_z(roll)
    }

    /// Inverse of [`Rotation::from_yaw_pitch_roll`]; pitch is in `[−π/2, π/2]`.
    pub fn to_yaw_pitch_roll(&self) -> (f64, f64, f64) {
        let m = &self.0;
        let pitch = (-m[(1, 2)]).clamp(-1.0, 1.0).asin();
        let yaw = m[(0, 2)].atan2(m[(2, 2)]);
        let roll = m[(1, 0)].atan2(m[(1, 1)]);
        (yaw, pitch, roll)
    }

    pub fn from_quaternion(q: &UnitQuaternion<f64>) -> Self {
        Self(q.to_rotation_matrix().into_inner())
    }

    pub fn to_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_matrix(&self.0)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Projects back onto SO(3) (polar decomposition via SVD).
    pub fn reorthonormalize(&self) -> Self {
        let svd = self.0.svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            let mut u = u;
            u.column_mut(2).neg_mut();
            r = u * v_t;
        }
        Self(r)
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<Vector3<f64>> for Rotation {
    type Output = Vector3<f64>;

    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

/// Element of SE(3), mapping body coordinates into world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self::new(Rotation::identity(), t)
    }

    pub fn inverse(&self) -> Self {
        let r_inv = self.rotation.inverse();
        Self::new(r_inv, -(r_inv.0 * self.translation))
    }

    pub fn compose(&self, rhs: &Pose) -> Pose {
        Pose::new(
            self.rotation * rhs.rotation,
            self.rotation.0 * rhs.translation + self.translation,
        )
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.0 * p + self.translation
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation.0);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn reorthonormalize(&self) -> Pose {
        Pose::new(self.rotation.reorthonormalize(), self.translation)
    }

    /// Camera pose at `eye` looking at `target`, with `down` giving the
    /// world direction that should appear as +y in the image.
    pub fn look_at(eye: &Vector3<f64>, target: &Vector3<f64>, down: &Vector3<f64>) -> Pose {
        let z = (target - eye).normalize();
        let x = down.cross(&z).normalize();
        let y = z.cross(&x);
        let r = Matrix3::from_columns(&[x, y, z]);
        Pose::new(Rotation(r), *eye)
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl Mul<&Pose> for &Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        self.compose(rhs)
    }
}

/// Tangent vector of SE(3): axis-angle rotation then translation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    pub rot: Vector3<f64>,
    pub trans: Vector3<f64>,
}

impl Twist {
    pub fn new(rot: Vector3<f64>, trans: Vector3<f64>) -> Self {
        Self { rot, trans }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn norm(&self) -> f64 {
        (self.rot.norm_squared() + self.trans.norm_squared()).sqrt()
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.rot.x, self.rot.y, self.rot.z, self.trans.x, self.trans.y, self.trans.z]
    }
}

/// Isotropic prediction noise: `sigma_r` on each rotation axis (radians),
/// `sigma_t` on each translation axis (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct NoiseParams {
    pub sigma_r: f64,
    pub sigma_t: f64,
}

impl NoiseParams {
    pub fn new(sigma_r: f64, sigma_t: f64) -> Self {
        assert!(sigma_r >= 0.0 && sigma_t >= 0.0, "noise std devs must be non-negative");
        Self { sigma_r, sigma_t }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.sigma_r * factor, self.sigma_t * factor)
    }
}

/// Returns (sinθ/θ, (1−cosθ)/θ², (θ−sinθ)/θ³).
fn rodrigues_coefficients(theta: f64) -> (f64, f64, f64) {
    let t2 = theta * theta;
    if theta < SMALL_ANGLE {
        let t4 = t2 * t2;
        (
            1.0 - t2 / 6.0 + t4 / 120.0,
            0.5 - t2 / 24.0 + t4 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0,
        )
    } else {
        let (s, c) = theta.sin_cos();
        (s / theta, (1.0 - c) / t2, (theta - s) / (t2 * theta))
    }
}

/// Left Jacobian of SO(3).
pub fn left_jacobian(omega: &Vector3<f64>) -> Matrix3<f64> {
    let (_, b, c) = rodrigues_coefficients(omega.norm());
    let k = hat(omega);
    Matrix3::identity() + k * b + k * k * c
}

fn left_jacobian_inverse(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta = omega.norm();
    let k = hat(omega);
    let d = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        let (a, b, _) = rodrigues_coefficients(theta);
        (1.0 - a / (2.0 * b)) / (theta * theta)
    };
    Matrix3::identity() - k * 0.5 + k * k * d
}

pub fn exp_map(delta: &Twist) -> Pose {
    Pose::new(Rotation::exp(&delta.rot), left_jacobian(&delta.rot) * delta.trans)
}

pub fn log_map(pose: &Pose) -> Result<Twist, GeometryError> {
    let rot = pose.rotation.log()?;
    Ok(Twist::new(rot, left_jacobian_inverse(&rot) * pose.translation))
}

/// Draws `δ ~ N(0, diag(σ_R²·I₃, σ_t²·I₃))`.
pub fn sample_noise<R: Rng + ?Sized>(params: &NoiseParams, rng: &mut R) -> Twist {
    let mut draw = |sigma: f64| -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        z * sigma
    };
    let rot = Vector3::new(draw(params.sigma_r), draw(params.sigma_r), draw(params.sigma_r));
    let trans = Vector3::new(draw(params.sigma_t), draw(params.sigma_t), draw(params.sigma_t));
    Twist::new(rot, trans)
}

/// Geodesic distance `arccos((tr(aᵀb) − 1)/2)` in degrees.
pub fn rotation_geodesic_deg(a: &Rotation, b: &Rotation) -> f64 {
    let c = ((a.0.transpose() * b.0).trace() - 1.0) * 0.5;
    c.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Weighted geodesic L2 mean of rotations (Karcher mean).
///
/// Weights are normalized to sum to one. Starts from the highest-weight
/// rotation and iterates `R ← R·exp(Σᵢ wᵢ log(RᵀRᵢ))` until the update norm falls below 1e-10 or
/// 100 iterations have run.
pub fn rotation_average(rotations: &[Rotation], weights: &[f64]) -> Result<Rotation, GeometryError> {
    if rotations.is_empty() {
        return Err(GeometryError::Empty);
    }
    if rotations.len() != weights.len() {
        return Err(GeometryError::LengthMismatch {
            rotations: rotations.len(),
            weights: weights.len(),
        });
    }
    let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    if !(total > 0.0) {
        return Ok(rotations[0]);
    }
    let start = weights
        .iter()
        .enumerate()
        .fold(0, |best, (i, &w)| if w > weights[best] { i } else { best });
    let mut mean = rotations[start];
    let mut update_norm = f64::INFINITY;
    for _ in 0..KARCHER_MAX_ITERATIONS {
        let inv = mean.inverse();
        let mut step = Vector3::zeros();
        for (r, &w) in rotations.iter().zip(weights) {
            if w > 0.0 {
                step += (inv * *r).log_unchecked() * (w / total);
            }
        }
        update_norm = step.norm();
        mean = mean * Rotation::exp(&step);
        if update_norm < KARCHER_TOLERANCE {
            return Ok(mean);
        }
    }
    if update_norm > KARCHER_ACCEPT {
        Err(GeometryError::NonConvergence {
            iterations: KARCHER_MAX_ITERATIONS,
            update_norm,
            last: mean,
        })
    } else {
        Ok(mean)
    }
}

/// `Σᵢ wᵢ log(RᵀRᵢ)`: the Karcher-mean gradient, zero at a stationary point.
pub fn karcher_residual(mean: &Rotation, rotations: &[Rotation], weights: &[f64]) -> Vector3<f64> {
    let inv = mean.inverse();
    rotations
        .iter()
        .zip(weights)
        .map(|(r, &w)| (inv * *r).log_unchecked() * w)
        .sum()
}
