//! Monte Carlo localization over SE(3) poses.
//!
//! One filter iteration anneals the prediction noise and particle budget
//! from the current spread, predicts with the odometry and exp-map noise,
//! reweights particles photometrically against the map, extracts a pose
//! estimate from the weighted set and resamples to the annealed size.

mod anneal;
mod driver;
mod init;
mod resample;
mod update;

pub use anneal::{anneal, AnnealConfig, AnnealStage, AnnealState};
pub use driver::{FilterConfig, FilterStats, IterationOutput, ParticleFilter, StepOutput};
pub use init::{init_global, init_local, init_particles, InitSpec};
pub use resample::{resample, ResamplingScheme};
pub use update::{photometric_weight, residual_sum, update_weights, weight_floor, UpdateOutcome};

use nalgebra::Vector3;
use thiserror::Error;

use crate::camera::CameraError;
use crate::se3::{exp_map, rotation_average, sample_noise, GeometryError, NoiseParams, Pose, Rotation};

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("bad initialization spec: {0}")]
    BadSpec(String),
    #[error("bad filter config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Camera(#[from] CameraError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub pose: Pose,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    pub time_index: u64,
    compositions: u32,
}

/// Rotations are re-projected onto SO(3) after this many compositions.
const REORTHONORMALIZE_EVERY: u32 = 1000;

impl ParticleSet {
    /// Equal-weight set.
    pub fn from_poses(poses: Vec<Pose>) -> Self {
        assert!(!poses.is_empty(), "a particle set needs at least one particle");
        let w = 1.0 / poses.len() as f64;
        Self {
            particles: poses.into_iter().map(|pose| Particle { pose, weight: w }).collect(),
            time_index: 0,
            compositions: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    pub fn poses(&self) -> impl Iterator<Item = &Pose> {
        self.particles.iter().map(|p| &p.pose)
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    /// Replaces the weights with `raw / Σ raw`.
    pub(crate) fn set_normalized_weights(&mut self, raw: &[f64]) {
        let total: f64 = raw.iter().sum();
        for (p, w) in self.particles.iter_mut().zip(raw) {
            p.weight = w / total;
        }
    }

    fn note_compositions(&mut self, count: u32) {
        self.compositions += count;
        if self.compositions >= REORTHONORMALIZE_EVERY {
            for p in &mut self.particles {
                p.pose = p.pose.reorthonormalize();
            }
            self.compositions = 0;
        }
    }
}

/// `X ← X · odom · exp(δ)`, `δ ~ N(0, diag(σ_R²I, σ_t²I))`, per particle.
pub fn predict<R: rand::Rng + ?Sized>(set: &ParticleSet, odom: &Pose, noise: &NoiseParams, rng: &mut R) -> ParticleSet {
    let mut out = set.clone();
    for p in &mut out.particles {
        let eps = exp_map(&sample_noise(noise, rng));
        p.pose = p.pose.compose(odom).compose(&eps);
    }
    out.note_compositions(2);
    out
}

/// `√trace(Cov(positions))` with equal weights (population covariance).
pub fn position_spread(set: &ParticleSet) -> f64 {
    let n = set.len() as f64;
    let mean: Vector3<f64> = set.poses().map(|p| p.translation).sum::<Vector3<f64>>() / n;
    let ss: f64 = set.poses().map(|p| (p.translation - mean).norm_squared()).sum();
    (ss / n).sqrt()
}

/// Weighted mean position plus weighted Karcher mean rotation.
pub fn estimate_pose(set: &ParticleSet) -> Result<Pose, GeometryError> {
    let (translation, rotations, weights) = estimate_parts(set);
    Ok(Pose::new(rotation_average(&rotations, &weights)?, translation))
}

fn estimate_parts(set: &ParticleSet) -> (Vector3<f64>, Vec<Rotation>, Vec<f64>) {
    let translation = set
        .particles
        .iter()
        .map(|p| p.pose.translation * p.weight)
        .sum::<Vector3<f64>>();
    let rotations = set.poses().map(|p| p.rotation).collect();
    (translation, rotations, set.weights())
}
