//! Alpha-compositing quadrature of the volume rendering integral.
//!
//! For sorted depths `z_i` with gaps `δ_i = z_{i+1} − z_i` (the last gap runs
//! to `z_far`), `α_i = 1 − exp(−σ_i δ_i)` and `T_i = Π_{j<i} (1 − α_j)`; the
//! pixel color is `Σ_i T_i α_i c_i`, plus `T_end · background` when the field
//! has one. Compositing stops once transmittance drops below
//! [`TRANSMITTANCE_CUTOFF`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FieldSample, RadianceField};
use crate::camera::{pixel_to_ray, CameraIntrinsics, Image, Ray, Rgb};
use crate::rng::derive_rng;
use crate::se3::Pose;

/// Remaining samples can change the color by at most this much.
pub const TRANSMITTANCE_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub z_near: f64,
    pub z_far: f64,
    pub n_coarse: usize,
    #[serde(default)]
    pub n_fine: usize,
    #[serde(default)]
    pub stratified: bool,
}

impl RenderConfig {
    /// 64 midpoint samples, no fine pass.
    pub fn filter_default() -> Self {
        Self { z_near: 0.05, z_far: 6.0, n_coarse: 64, n_fine: 0, stratified: false }
    }

    /// 128 stratified coarse samples plus 64 importance samples.
    pub fn dataset_default() -> Self {
        Self { z_near: 0.05, z_far: 6.0, n_coarse: 128, n_fine: 64, stratified: true }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.z_near >= 0.0 && self.z_near < self.z_far) {
            return Err(format!("need 0 <= z_near < z_far, got [{}, {}]", self.z_near, self.z_far));
        }
        if self.n_coarse < 2 {
            return Err("n_coarse must be at least 2".into());
        }
        Ok(())
    }

    /// Field evaluations per ray.
    pub fn samples_per_ray(&self) -> usize {
        self.n_coarse + self.n_fine
    }

    fn bin_width(&self) -> f64 {
        (self.z_far - self.z_near) / self.n_coarse as f64
    }

    /// Whether rendering consumes randomness at all.
    pub fn is_random(&self) -> bool {
        self.stratified
    }
}

/// `n_coarse` sorted depths, one per equal-width bin of `[z_near, z_far]`:
/// bin midpoints, or one uniform draw per bin when stratified.
pub fn sample_coarse<R: Rng + ?Sized>(cfg: &RenderConfig, rng: &mut R) -> Vec<f64> {
    let width = cfg.bin_width();
    (0..cfg.n_coarse)
        .map(|i| {
            let offset = if cfg.stratified { rng.random::<f64>() } else { 0.5 };
            (cfg.z_near + (i as f64 + offset) * width).min(cfg.z_far)
        })
        .collect()
}

/// Inverse-CDF samples from the piecewise-constant density that puts mass
/// `coarse_weights[i]` uniformly on coarse bin `i`, merged and sorted with the
/// coarse depths. All-zero weights fall back to a uniform density.
pub fn sample_fine<R: Rng + ?Sized>(
    cfg: &RenderConfig,
    coarse_depths: &[f64],
    coarse_weights: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    assert_eq!(coarse_depths.len(), coarse_weights.len());
    let fine = draw_fine(cfg, coarse_weights, rng);
    let mut merged = Vec::with_capacity(coarse_depths.len() + fine.len());
    merged.extend_from_slice(coarse_depths);
    merged.extend(fine);
    merged.sort_by(f64::total_cmp);
    merged
}

fn draw_fine<R: Rng + ?Sized>(cfg: &RenderConfig, weights: &[f64], rng: &mut R) -> Vec<f64> {
    let n = cfg.n_fine;
    if n == 0 {
        return Vec::new();
    }
    let bins = weights.len();
    let width = (cfg.z_far - cfg.z_near) / bins as f64;
    let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    let uniform = !(total > 0.0);
    let mut cdf = Vec::with_capacity(bins + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for w in weights {
        acc += if uniform { 1.0 } else { w.max(0.0) };
        cdf.push(acc);
    }
    let total = acc;
    (0..n)
        .map(|k| {
            let offset = if cfg.stratified { rng.random::<f64>() } else { 0.5 };
            let u = (k as f64 + offset) / n as f64 * total;
            // First bin whose upper CDF edge exceeds u, skipping empty bins.
            let bin = cdf[1..].partition_point(|&c| c <= u).min(bins - 1);
            let mass = cdf[bin + 1] - cdf[bin];
            let frac = if mass > 0.0 { ((u - cdf[bin]) / mass).clamp(0.0, 1.0) } else { 0.5 };
            (cfg.z_near + (bin as f64 + frac) * width).min(cfg.z_far)
        })
        .collect()
}

struct Composite {
    color: Rgb,
    transmittance: f64,
}

fn composite(samples: &[(f64, FieldSample)], z_far: f64, mut weights: Option<&mut Vec<f64>>) -> Composite {
    let mut color = Rgb::zeros();
    let mut transmittance = 1.0;
    for (i, (z, s)) in samples.iter().enumerate() {
        let next = samples.get(i + 1).map_or(z_far, |(zn, _)| *zn);
        let delta = (next - z).max(0.0);
        let alpha = 1.0 - (-s.sigma * delta).exp();
        let w = transmittance * alpha;
        color += s.color * w;
        if let Some(ws) = weights.as_deref_mut() {
            ws.push(w);
        }
        transmittance *= 1.0 - alpha;
    }
    Composite { color, transmittance }
}

/// Like [`render_ray`], also returning the accumulated opacity `Σ T_i α_i`.
pub fn render_ray_with_opacity<F, R>(field: &F, ray: &Ray, cfg: &RenderConfig, rng: &mut R) -> (Rgb, f64)
where
    F: RadianceField + ?Sized,
    R: Rng + ?Sized,
{
    let coarse = sample_coarse(cfg, rng);
    let query = |z: f64| field.query(&ray.at(z), &ray.direction);
    let result = if cfg.n_fine == 0 {
        march(&coarse, cfg.z_far, query)
    } else {
        let coarse_samples: Vec<(f64, FieldSample)> = coarse.iter().map(|&z| (z, query(z))).collect();
        let mut weights = Vec::with_capacity(coarse.len());
        composite(&coarse_samples, cfg.z_far, Some(&mut weights));
        let mut fine: Vec<(f64, FieldSample)> =
            draw_fine(cfg, &weights, rng).into_iter().map(|z| (z, query(z))).collect();
        fine.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged = Vec::with_capacity(coarse_samples.len() + fine.len());
        let (mut i, mut j) = (0, 0);
        while i < coarse_samples.len() || j < fine.len() {
            if j == fine.len() || (i < coarse_samples.len() && coarse_samples[i].0 <= fine[j].0) {
                merged.push(coarse_samples[i]);
                i += 1;
            } else {
                merged.push(fine[j]);
                j += 1;
            }
        }
        composite(&merged, cfg.z_far, None)
    };
    let mut color = result.color;
    if let Some(bg) = field.background() {
        color += bg * result.transmittance;
    }
    let color = color.map(|c| c.clamp(0.0, 1.0));
    (color, (1.0 - result.transmittance).clamp(0.0, 1.0))
}

/// Single pass over sorted depths, stopping once the ray is opaque.
fn march(depths: &[f64], z_far: f64, query: impl Fn(f64) -> FieldSample) -> Composite {
    let mut color = Rgb::zeros();
    let mut transmittance = 1.0;
    for (i, &z) in depths.iter().enumerate() {
        let s = query(z);
        if s.sigma > 0.0 {
            let next = depths.get(i + 1).copied().unwrap_or(z_far);
            let alpha = 1.0 - (-s.sigma * (next - z).max(0.0)).exp();
            color += s.color * (transmittance * alpha);
            transmittance *= 1.0 - alpha;
            if transmittance < TRANSMITTANCE_CUTOFF {
                break;
            }
        }
    }
    Composite { color, transmittance }
}

pub fn render_ray<F, R>(field: &F, ray: &Ray, cfg: &RenderConfig, rng: &mut R) -> Rgb
where
    F: RadianceField + ?Sized,
    R: Rng + ?Sized,
{
    render_ray_with_opacity(field, ray, cfg, rng).0
}

/// Renders every pixel. Rows are rendered in parallel, each with its own
/// random stream derived from one draw of `rng`.
pub fn render_image<F, R>(field: &F, pose: &Pose, intr: &CameraIntrinsics, cfg: &RenderConfig, rng: &mut R) -> Image
where
    F: RadianceField + ?Sized,
    R: Rng + ?Sized,
{
    let seed: u64 = rng.random();
    let w = intr.width;
    let rows: Vec<Vec<Rgb>> = (0..intr.height)
        .into_par_iter()
        .map(|v| {
            let mut row_rng = derive_rng(seed, 0x5245_4e44, v as u64);
            (0..w)
                .map(|u| {
                    let ray = pixel_to_ray(intr, pose, u, v).expect("pixel in bounds");
                    render_ray(field, &ray, cfg, &mut row_rng)
                })
                .collect()
        })
        .collect();
    Image::from_pixels(w, intr.height, rows.into_iter().flatten().collect())
}
