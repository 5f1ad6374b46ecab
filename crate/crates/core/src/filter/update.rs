//! Photometric measurement update.
//!
//! Each particle renders the same random subset of `M` pixels from its pose.
//! With `s` the summed squared RGB residual, its raw weight is
//! `(M / max(ε, s))⁴` where `ε = 1e-8·M`; weights are then normalized.

use rand::Rng;
use rayon::prelude::*;

use super::{FilterError, ParticleSet};
use crate::camera::{pixel_to_ray, sample_pixels, CameraIntrinsics, Image, PixelSample};
use crate::field::{render_ray, RadianceField, RenderConfig};
use crate::rng::derive_rng;

/// Lower clamp on the residual sum for `m` pixels.
pub fn weight_floor(m: usize) -> f64 {
    1e-8 * m as f64
}

pub fn photometric_weight(m: usize, residual_sum: f64) -> f64 {
    (m as f64 / residual_sum.max(weight_floor(m))).powi(4)
}

/// `Σ_j ‖observed_j − rendered_j‖²` over RGB.
pub fn residual_sum(observed: &[PixelSample], rendered: &[crate::camera::Rgb]) -> f64 {
    observed.iter().zip(rendered).map(|(o, r)| (o.color - r).norm_squared()).sum()
}

#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub set: ParticleSet,
    pub residual_sums: Vec<f64>,
    pub pixels: Vec<PixelSample>,
}

/// Reweights every particle against `image`. The per-particle renders run
/// in parallel; any render randomness comes from a stream keyed on the
/// particle index.
#[allow(clippy::too_many_arguments)]
pub fn update_weights<F, R>(
    set: &ParticleSet,
    image: &Image,
    field: &F,
    intr: &CameraIntrinsics,
    cfg: &RenderConfig,
    m: usize,
    rng: &mut R,
) -> Result<UpdateOutcome, FilterError>
where
    F: RadianceField + ?Sized,
    R: Rng + ?Sized,
{
    let pixels = sample_pixels(intr, image, m, rng)?;
    let render_seed: u64 = rng.random();
    let residual_sums: Vec<f64> = set
        .particles
        .par_iter()
        .enumerate()
        .map(|(i, particle)| {
            let mut prng = derive_rng(render_seed, set.time_index, i as u64);
            pixels
                .iter()
                .map(|px| {
                    let ray = pixel_to_ray(intr, &particle.pose, px.u, px.v).expect("sampled pixel in bounds");
                    (px.color - render_ray(field, &ray, cfg, &mut prng)).norm_squared()
                })
                .sum()
        })
        .collect();
    let raw: Vec<f64> = residual_sums.iter().map(|&s| photometric_weight(m, s)).collect();
    let mut out = set.clone();
    out.set_normalized_weights(&raw);
    Ok(UpdateOutcome { set: out, residual_sums, pixels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{render_image, AnalyticScene};
    use crate::rng::seeded;
    use crate::se3::Pose;
    use nalgebra::Vector3;

    #[test]
    fn raw_weight_by_hand() {
        assert_eq!(photometric_weight(2, 0.5), 256.0);
        assert_eq!(photometric_weight(64, 64.0), 1.0);
    }

    #[test]
    fn fourth_power_ratio() {
        let s = 0.37;
        let ratio = photometric_weight(32, s) / photometric_weight(32, 4.0 * s);
        assert!((ratio - 256.0).abs() < 1e-9);
    }

    #[test]
    fn exact_match_hits_clamp() {
        assert_eq!(photometric_weight(10, 0.0), (10.0 / 1e-7f64).powi(4));
        assert_eq!(photometric_weight(10, 1e-12), photometric_weight(10, 0.0));
    }

    fn setup() -> (AnalyticScene, CameraIntrinsics, RenderConfig, Pose, Image) {
        let scene = AnalyticScene::triad();
        let intr = CameraIntrinsics::from_horizontal_fov(32, 32, 70.0).unwrap();
        let cfg = RenderConfig::filter_default();
        let truth = Pose::look_at(&Vector3::new(0.0, -0.5, 0.0), &Vector3::new(0.0, 0.3, 2.5), &Vector3::y());
        let image = render_image(&scene, &truth, &intr, &cfg, &mut seeded(0));
        (scene, intr, cfg, truth, image)
    }

    #[test]
    fn truth_particle_dominates_self_consistent_image() {
        let (scene, intr, cfg, truth, image) = setup();
        let off = truth.compose(&Pose::from_translation(Vector3::new(0.3, 0.0, 0.0)));
        let set = ParticleSet::from_poses(vec![off, truth]);
        let out = update_weights(&set, &image, &scene, &intr, &cfg, 200, &mut seeded(1)).unwrap();
        assert!(out.residual_sums[1] <= weight_floor(200));
        assert!(out.set.particles[1].weight > 0.999_999);
        assert!((out.set.weight_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smaller_residual_means_larger_weight() {
        let (scene, intr, cfg, truth, image) = setup();
        let poses: Vec<Pose> = [0.02, 0.05, 0.1, 0.2, 0.4]
            .iter()
            .map(|dx| truth.compose(&Pose::from_translation(Vector3::new(*dx, 0.01, 0.0))))
            .collect();
        let set = ParticleSet::from_poses(poses);
        let out = update_weights(&set, &image, &scene, &intr, &cfg, 256, &mut seeded(5)).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if out.residual_sums[i] < out.residual_sums[j] {
                    assert!(out.set.particles[i].weight > out.set.particles[j].weight);
                }
            }
        }
        assert!(out.set.particles.iter().all(|p| p.weight >= 0.0));
    }

    #[test]
    fn bad_pixel_count() {
        let (scene, intr, cfg, truth, image) = setup();
        let set = ParticleSet::from_poses(vec![truth]);
        assert!(update_weights(&set, &image, &scene, &intr, &cfg, 0, &mut seeded(0)).is_err());
    }
}
