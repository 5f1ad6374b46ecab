//! Radiance-field map models and the volumetric renderer.

mod analytic;
mod render;
mod voxel;

pub use analytic::{AnalyticScene, Primitive, Shape};
pub use render::{render_image, render_ray, render_ray_with_opacity, sample_coarse, sample_fine, RenderConfig};
pub use voxel::{bake_voxels, VoxelError, VoxelField};

use nalgebra::Vector3;
use crate::camera::Rgb;

/// Density (1/m) and emitted color at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub sigma: f64,
    pub color: Rgb,
}

impl FieldSample {
    pub const EMPTY: FieldSample = FieldSample { sigma: 0.0, color: Rgb::new(0.0, 0.0, 0.0) };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>) -> Self {
        Self { min, max }
    }

    pub fn cube(half: f64) -> Self {
        Self::new(Vector3::repeat(-half), Vector3::repeat(half))
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains(&other.min) && self.contains(&other.max)
    }

    pub fn extent(&self) -> Vector3<f64> {
        self.max - self.min
    }
}

/// The map: density and color as a function of position and view direction.
///
/// Implementations are immutable and queried concurrently from many threads.
pub trait RadianceField: Send + Sync {
    /// Must return `FieldSample::EMPTY` outside [`RadianceField::bounds`].
    fn query(&self, position: &Vector3<f64>, view_dir: &Vector3<f64>) -> FieldSample;

    fn bounds(&self) -> Aabb;

    /// Color seen by rays that leave the volume unabsorbed.
    fn background(&self) -> Option<Rgb> {
        None
    }
}

impl<F: RadianceField + ?Sized> RadianceField for &F {
    fn query(&self, position: &Vector3<f64>, view_dir: &Vector3<f64>) -> FieldSample {
        (**self).query(position, view_dir)
    }

    fn bounds(&self) -> Aabb {
        (**self).bounds()
    }

    fn background(&self) -> Option<Rgb> {
        (**self).background()
    }
}

/// A field with constant density and color everywhere inside its bounds.
#[derive(Debug, Clone)]
pub struct ConstantField {
    pub sigma: f64,
    pub color: Rgb,
    pub bounds: Aabb,
}

impl RadianceField for ConstantField {
    fn query(&self, position: &Vector3<f64>, _view_dir: &Vector3<f64>) -> FieldSample {
        if self.bounds.contains(position) {
            FieldSample { sigma: self.sigma, color: self.color }
        } else {
            FieldSample::EMPTY
        }
    }

    fn bounds(&self) -> Aabb {
        self.bounds
    }
}
