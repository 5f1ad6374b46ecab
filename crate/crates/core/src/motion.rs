//! Sources of the relative motion fed to the prediction step.
//!
//! Trajectory files hold one sample per line,
//! `timestamp tx ty tz qx qy qz qw`, with world-from-body poses. Blank lines
//! and lines starting with `#` are skipped. Odometry files use the same line
//! format with body-relative poses: the first line is an anchor carrying the
//! start time and an identity pose, and every following line is the segment
//! ending at its timestamp.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use thiserror::Error;

use crate::se3::{exp_map, sample_noise, NoiseParams, Pose, Rotation};

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("need at least 2 trajectory samples, got {0}")]
    TooShort(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: timestamp {timestamp} does not increase")]
    NonMonotonicTimestamps { line: usize, timestamp: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub timestamp: f64,
    pub pose: Pose,
}

/// Body-frame motion from the previous sample to the current one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometrySegment {
    pub relative: Pose,
    pub dt: f64,
}

/// Relative motion between consecutive ground-truth poses, each perturbed in
/// the body frame at the segment end: `X_{t−1}⁻¹ · X_t · exp(δ)`.
pub fn perturbed_gt_odometry<R: Rng + ?Sized>(
    traj: &[TrajectorySample],
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<OdometrySegment>, MotionError> {
    if traj.len() < 2 {
        return Err(MotionError::TooShort(traj.len()));
    }
    Ok(traj
        .windows(2)
        .map(|w| OdometrySegment {
            relative: w[0].pose.inverse() * w[1].pose * exp_map(&sample_noise(noise, rng)),
            dt: w[1].timestamp - w[0].timestamp,
        })
        .collect())
}

/// Constant body-frame velocity: the motion from `prev2` to `prev` repeats.
pub fn constant_velocity_propagate(prev: &Pose, prev2: &Pose) -> Pose {
    prev2.inverse() * *prev
}

/// Chains segments onto `start`, returning every intermediate pose
/// (`start` included).
pub fn integrate_odometry(start: &Pose, segments: &[OdometrySegment]) -> Vec<Pose> {
    let mut out = Vec::with_capacity(segments.len() + 1);
    out.push(*start);
    let mut cur = *start;
    for s in segments {
        cur = cur * s.relative;
        out.push(cur);
    }
    out
}

fn format_line(out: &mut String, timestamp: f64, pose: &Pose) {
    let q = pose.rotation.to_quaternion();
    let t = pose.translation;
    let _ = writeln!(out, "{timestamp} {} {} {} {} {} {} {}", t.x, t.y, t.z, q.i, q.j, q.k, q.w);
}

pub fn format_trajectory(samples: &[TrajectorySample]) -> String {
    let mut out = String::from("# timestamp tx ty tz qx qy qz qw\n");
    for s in samples {
        format_line(&mut out, s.timestamp, &s.pose);
    }
    out
}

pub fn save_trajectory(path: impl AsRef<Path>, samples: &[TrajectorySample]) -> Result<(), MotionError> {
    fs::write(path, format_trajectory(samples))?;
    Ok(())
}

pub fn parse_trajectory(text: &str) -> Result<Vec<TrajectorySample>, MotionError> {
    let mut samples: Vec<TrajectorySample> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = trimmed
            .split_whitespace()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| MotionError::Parse { line, message: e.to_string() })?;
        if fields.len() != 8 {
            return Err(MotionError::Parse { line, message: format!("expected 8 fields, got {}", fields.len()) });
        }
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(MotionError::Parse { line, message: "non-finite value".into() });
        }
        let q = Quaternion::new(fields[7], fields[4], fields[5], fields[6]);
        if (q.norm() - 1.0).abs() > 1e-6 {
            return Err(MotionError::Parse { line, message: format!("quaternion norm {} is not 1", q.norm()) });
        }
        let pose = Pose::new(
            Rotation::from_quaternion(&UnitQuaternion::from_quaternion(q)),
            Vector3::new(fields[1], fields[2], fields[3]),
        );
        let timestamp = fields[0];
        if let Some(prev) = samples.last() {
            if timestamp <= prev.timestamp {
                return Err(MotionError::NonMonotonicTimestamps { line, timestamp });
            }
        }
        samples.push(TrajectorySample { timestamp, pose });
    }
    if samples.is_empty() {
        return Err(MotionError::Parse { line: last_line.max(1), message: "no samples".into() });
    }
    Ok(samples)
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Vec<TrajectorySample>, MotionError> {
    parse_trajectory(&fs::read_to_string(path)?)
}

pub fn format_odometry(start_time: f64, segments: &[OdometrySegment]) -> String {
    let mut out = String::from("# timestamp tx ty tz qx qy qz qw (relative; first line is the anchor)\n");
    format_line(&mut out, start_time, &Pose::identity());
    let mut t = start_time;
    for s in segments {
        t += s.dt;
        format_line(&mut out, t, &s.relative);
    }
    out
}

pub fn save_odometry(path: impl AsRef<Path>, start_time: f64, segments: &[OdometrySegment]) -> Result<(), MotionError> {
    fs::write(path, format_odometry(start_time, segments))?;
    Ok(())
}

pub fn parse_odometry(text: &str) -> Result<Vec<OdometrySegment>, MotionError> {
    let samples = parse_trajectory(text)?;
    let anchor = &samples[0];
    if (anchor.pose.translation.norm() > 1e-9) || anchor.pose.rotation.angle() > 1e-9 {
        return Err(MotionError::Parse { line: 1, message: "odometry anchor line must carry the identity pose".into() });
    }
    Ok(samples
        .windows(2)
        .map(|w| OdometrySegment { relative: w[1].pose, dt: w[1].timestamp - w[0].timestamp })
        .collect())
}

pub fn load_odometry(path: impl AsRef<Path>) -> Result<Vec<OdometrySegment>, MotionError> {
    parse_odometry(&fs::read_to_string(path)?)
}

/// Camera poses on a horizontal arc around `target`, all looking at it.
///
/// The arc spans `±half_angle` around the −z side of the target at the given
/// `radius`, `height` meters above the target (world up is −y).
pub fn orbit(target: &Vector3<f64>, radius: f64, height: f64, half_angle: f64, count: usize, dt: f64) -> Vec<TrajectorySample> {
    (0..count)
        .map(|i| {
            let theta = if count == 1 { 0.0 } else { -half_angle + 2.0 * half_angle * i as f64 / (count - 1) as f64 };
            let eye = target + Vector3::new(radius * theta.sin(), -height, -radius * theta.cos());
            TrajectorySample { timestamp: i as f64 * dt, pose: Pose::look_at(&eye, target, &Vector3::y()) }
        })
        .collect()
}
