use serde::{Deserialize, Serialize};

use super::{
    anneal, estimate_parts, position_spread, predict, resample, update_weights, AnnealConfig, AnnealState,
    FilterError, ParticleSet, ResamplingScheme,
};
use crate::camera::{CameraIntrinsics, Image};
use crate::field::{RadianceField, RenderConfig};
use crate::rng::{seeded, StreamRng};
use crate::se3::{rotation_average, GeometryError, NoiseParams, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub anneal: AnnealConfig,
    /// Pixels rendered per particle and update step (M).
    pub pixels: usize,
    pub resampling: ResamplingScheme,
    pub updates_per_image: usize,
    /// When false the initial noise and `n_init` are kept for the whole run.
    pub annealing: bool,
    pub render: RenderConfig,
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        self.anneal.validate()?;
        self.render.validate().map_err(FilterError::BadConfig)?;
        if self.pixels == 0 {
            return Err(FilterError::BadConfig("pixels per update must be positive".into()));
        }
        Ok(())
    }
}

/// Running totals across the lifetime of a filter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterStats {
    pub updates: u64,
    /// Field evaluations: particles × pixels × samples per ray, summed.
    pub forward_passes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutput {
    /// Estimate of the equal-weight cloud right after prediction.
    pub predicted: Pose,
    pub estimate: Pose,
    /// False when rotation averaging hit its iteration cap; the estimate then
    /// carries the last Karcher iterate.
    pub rotation_converged: bool,
    pub anneal: AnnealState,
    /// Particle count during the update (before resampling).
    pub particles: usize,
    /// Spread that drove the annealing decision.
    pub spread: f64,
    /// Spread of the resampled set.
    pub spread_after: f64,
    pub forward_passes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub estimate: Pose,
    pub anneal: AnnealState,
    pub iterations: Vec<IterationOutput>,
}

/// Owns the particle set and drives predict / update / resample.
pub struct ParticleFilter<'m, F: RadianceField + ?Sized> {
    map: &'m F,
    intr: CameraIntrinsics,
    cfg: FilterConfig,
    set: ParticleSet,
    rng: StreamRng,
    stats: FilterStats,
}

impl<'m, F: RadianceField + ?Sized> ParticleFilter<'m, F> {
    pub fn new(map: &'m F, intr: CameraIntrinsics, cfg: FilterConfig, initial: ParticleSet, seed: u64) -> Result<Self, FilterError> {
        cfg.validate()?;
        intr.validate()?;
        Ok(Self { map, intr, cfg, set: initial, rng: seeded(seed), stats: FilterStats::default() })
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.set
    }

    pub fn config(&self) -> &FilterConfig {
        &self.cfg
    }

    pub fn stats(&self) -> FilterStats {
        self.stats
    }

    pub fn spread(&self) -> f64 {
        position_spread(&self.set)
    }

    /// Noise and particle budget for the current spread.
    pub fn anneal_state(&self) -> AnnealState {
        if self.cfg.annealing {
            anneal(&self.cfg.anneal, self.spread())
        } else {
            self.cfg.anneal.initial_state()
        }
    }

    pub fn predict(&mut self, odom: &Pose, noise: &NoiseParams) {
        self.set = predict(&self.set, odom, noise, &mut self.rng);
    }

    /// Estimate from the current weights, falling back to the last Karcher
    /// iterate if rotation averaging does not converge.
    pub fn estimate(&self) -> (Pose, bool) {
        let (translation, rotations, weights) = estimate_parts(&self.set);
        match rotation_average(&rotations, &weights) {
            Ok(r) => (Pose::new(r, translation), true),
            Err(GeometryError::NonConvergence { last, .. }) => (Pose::new(last, translation), false),
            Err(e) => unreachable!("particle set is non-empty and weights match: {e}"),
        }
    }

    /// Photometric reweighting against `image`.
    pub fn update(&mut self, image: &Image) -> Result<(), FilterError> {
        let out = update_weights(&self.set, image, self.map, &self.intr, &self.cfg.render, self.cfg.pixels, &mut self.rng)?;
        self.set = out.set;
        self.stats.updates += 1;
        self.stats.forward_passes += self.forward_passes_per_update();
        Ok(())
    }

    pub fn forward_passes_per_update(&self) -> u64 {
        (self.set.len() * self.cfg.pixels * self.cfg.render.samples_per_ray()) as u64
    }

    pub fn resample(&mut self, n: usize) {
        self.set = resample(&self.set, n, self.cfg.resampling, &mut self.rng);
        self.set.time_index += 1;
    }

    /// One anneal → predict → update → estimate → resample cycle.
    pub fn iterate(&mut self, odom: &Pose, image: &Image) -> Result<IterationOutput, FilterError> {
        let spread = self.spread();
        let state = self.anneal_state();
        self.predict(odom, &state.noise());
        let predicted = self.estimate().0;
        let particles = self.set.len();
        let passes = self.forward_passes_per_update();
        self.update(image)?;
        let (estimate, rotation_converged) = self.estimate();
        self.resample(state.n);
        Ok(IterationOutput {
            predicted,
            estimate,
            rotation_converged,
            anneal: state,
            particles,
            spread,
            spread_after: self.spread(),
            forward_passes: passes,
        })
    }

    /// Processes one image: `updates_per_image` iterations, with the odometry
    /// applied on the first only. With zero updates the particles are only
    /// predicted and the estimate is taken from the predicted set.
    pub fn step(&mut self, odom: &Pose, image: &Image) -> Result<StepOutput, FilterError> {
        image.check_matches(&self.intr)?;
        if self.cfg.updates_per_image == 0 {
            let state = self.anneal_state();
            self.predict(odom, &state.noise());
            self.set.time_index += 1;
            return Ok(StepOutput { estimate: self.estimate().0, anneal: state, iterations: Vec::new() });
        }
        let mut iterations = Vec::with_capacity(self.cfg.updates_per_image);
        for k in 0..self.cfg.updates_per_image {
            let o = if k == 0 { *odom } else { Pose::identity() };
            iterations.push(self.iterate(&o, image)?);
        }
        let last = iterations.last().expect("at least one iteration");
        Ok(StepOutput { estimate: last.estimate, anneal: last.anneal, iterations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{render_image, AnalyticScene};
    use crate::filter::AnnealStage;
    use nalgebra::Vector3;

    fn cfg(updates: usize) -> FilterConfig {
        FilterConfig {
            anneal: AnnealConfig {
                sigma_r_init: 0.0,
                sigma_t_init: 0.0,
                alpha_refine: 0.1,
                alpha_super_refine: 0.05,
                n_init: 1,
                n_reduced: 1,
            },
            pixels: 16,
            resampling: ResamplingScheme::Multinomial,
            updates_per_image: updates,
            annealing: true,
            render: RenderConfig::filter_default(),
        }
    }

    #[test]
    fn single_particle_at_truth_is_fixed_point() {
        let scene = AnalyticScene::triad();
        let intr = CameraIntrinsics::from_horizontal_fov(24, 24, 60.0).unwrap();
        let truth = Pose::look_at(&Vector3::new(0.2, -0.4, 0.1), &Vector3::new(0.0, 0.3, 2.5), &Vector3::y());
        let image = render_image(&scene, &truth, &intr, &RenderConfig::filter_default(), &mut seeded(0));
        let mut f = ParticleFilter::new(&scene, intr, cfg(3), ParticleSet::from_poses(vec![truth]), 1).unwrap();
        let out = f.step(&Pose::identity(), &image).unwrap();
        assert!((out.estimate.translation - truth.translation).norm() < 1e-12);
        assert!(crate::se3::rotation_geodesic_deg(&out.estimate.rotation, &truth.rotation) < 1e-6);
        assert_eq!(out.iterations.len(), 3);
        assert_eq!(out.anneal.stage, AnnealStage::SuperRefine);
        assert_eq!(f.stats().updates, 3);
        assert_eq!(f.stats().forward_passes, 3 * 16 * 64);
    }

    #[test]
    fn zero_updates_only_predicts() {
        let scene = AnalyticScene::triad();
        let intr = CameraIntrinsics::from_horizontal_fov(8, 8, 60.0).unwrap();
        let image = Image::new(8, 8, crate::camera::Rgb::zeros());
        let start = Pose::identity();
        let mut f = ParticleFilter::new(&scene, intr, cfg(0), ParticleSet::from_poses(vec![start]), 1).unwrap();
        let odom = Pose::from_translation(Vector3::new(0.0, 0.0, 0.25));
        for _ in 0..4 {
            f.step(&odom, &image).unwrap();
        }
        let (est, _) = f.estimate();
        assert!((est.translation - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert_eq!(f.stats().forward_passes, 0);
    }

    #[test]
    fn rejects_mismatched_image() {
        let scene = AnalyticScene::triad();
        let intr = CameraIntrinsics::from_horizontal_fov(8, 8, 60.0).unwrap();
        let mut f = ParticleFilter::new(&scene, intr, cfg(1), ParticleSet::from_poses(vec![Pose::identity()]), 1).unwrap();
        assert!(f.step(&Pose::identity(), &Image::new(9, 8, crate::camera::Rgb::zeros())).is_err());
    }
}
