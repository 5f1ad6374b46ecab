//! Pinhole camera: pixel to ray conversion and pixel subsampling.
//!
//! Camera frame: +z forward, +x right, +y down. Pixel `(u, v)` is column `u`,
//! row `v`, and its center sits at `(u + 0.5, v + 0.5)`.

use std::path::Path;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::se3::Pose;

pub type Rgb = Vector3<f64>;

#[derive(Debug, Error)]
pub enum CameraError {
    #[error("pixel ({u}, {v}) outside {width}x{height} image")]
    OutOfBounds { u: u32, v: u32, width: u32, height: u32 },
    #[error("cannot sample {requested} pixels from an image with {available}")]
    BadCount { requested: usize, available: usize },
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("image is {got_w}x{got_h}, camera expects {want_w}x{want_h}")]
    SizeMismatch { got_w: u32, got_h: u32, want_w: u32, want_h: u32 },
    #[error("image io: {0}")]
    Io(#[from] image::ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self, CameraError> {
        let intr = Self { fx, fy, cx, cy, width, height };
        intr.validate()?;
        Ok(intr)
    }

    /// Square pixels, principal point at the image center.
    pub fn from_horizontal_fov(width: u32, height: u32, fov_x_deg: f64) -> Result<Self, CameraError> {
        let f = 0.5 * width as f64 / (0.5 * fov_x_deg.to_radians()).tan();
        Self::new(f, f, 0.5 * width as f64, 0.5 * height as f64, width, height)
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        let bad = |m: &str| Err(CameraError::InvalidIntrinsics(m.to_string()));
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return bad("focal lengths must be positive");
        }
        if self.width == 0 || self.height == 0 {
            return bad("image must be non-empty");
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy) {
            return bad("principal point outside image");
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Unnormalized camera-frame direction `K⁻¹·(u + 0.5, v + 0.5, 1)`.
    pub fn back_project(&self, u: u32, v: u32) -> Vector3<f64> {
        Vector3::new(
            (u as f64 + 0.5 - self.cx) / self.fx,
            (v as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vector3<f64>,
    pub direction: Vector3<f64>,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vector3<f64> {
        self.origin + self.direction * t
    }
}

pub fn pixel_to_ray(intr: &CameraIntrinsics, pose: &Pose, u: u32, v: u32) -> Result<Ray, CameraError> {
    if u >= intr.width || v >= intr.height {
        return Err(CameraError::OutOfBounds { u, v, width: intr.width, height: intr.height });
    }
    Ok(Ray {
        origin: pose.translation,
        direction: (pose.rotation * intr.back_project(u, v)).normalize(),
    })
}

/// Row-major RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Self {
        Self { width, height, pixels: vec![fill; width as usize * height as usize] }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Rgb>) -> Self {
        assert_eq!(pixels.len(), width as usize * height as usize);
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, u: u32, v: u32) -> Rgb {
        self.pixels[v as usize * self.width as usize + u as usize]
    }

    pub fn set(&mut self, u: u32, v: u32, c: Rgb) {
        self.pixels[v as usize * self.width as usize + u as usize] = c;
    }

    pub fn mean_abs_diff(&self, other: &Image) -> f64 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let total: f64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| (a - b).abs().sum())
            .sum();
        total / (3 * self.pixels.len()) as f64
    }

    pub fn check_matches(&self, intr: &CameraIntrinsics) -> Result<(), CameraError> {
        if self.width != intr.width || self.height != intr.height {
            return Err(CameraError::SizeMismatch {
                got_w: self.width,
                got_h: self.height,
                want_w: intr.width,
                want_h: intr.height,
            });
        }
        Ok(())
    }

    pub fn to_rgb8(&self) -> image::RgbImage {
        let q = |x: f64| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
        image::RgbImage::from_fn(self.width, self.height, |u, v| {
            let c = self.get(u, v);
            image::Rgb([q(c.x), q(c.y), q(c.z)])
        })
    }

    pub fn from_rgb8(img: &image::RgbImage) -> Self {
        let pixels = img
            .pixels()
            .map(|p| Rgb::new(p[0] as f64 / 255.0, p[1] as f64 / 255.0, p[2] as f64 / 255.0))
            .collect();
        Self::from_pixels(img.width(), img.height(), pixels)
    }

    /// Writes an 8-bit PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), CameraError> {
        self.to_rgb8().save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CameraError> {
        Ok(Self::from_rgb8(&image::open(path)?.to_rgb8()))
    }

    /// Places `self` and `other` next to each other.
    pub fn side_by_side(&self, other: &Image) -> Image {
        assert_eq!(self.height, other.height);
        let mut out = Image::new(self.width + other.width, self.height, Rgb::zeros());
        for v in 0..self.height {
            for u in 0..self.width {
                out.set(u, v, self.get(u, v));
            }
            for u in 0..other.width {
                out.set(self.width + u, v, other.get(u, v));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelSample {
    pub u: u32,
    pub v: u32,
    pub color: Rgb,
}

/// Draws `m` distinct pixels uniformly without replacement.
pub fn sample_pixels<R: Rng + ?Sized>(
    intr: &CameraIntrinsics,
    image: &Image,
    m: usize,
    rng: &mut R,
) -> Result<Vec<PixelSample>, CameraError> {
    image.check_matches(intr)?;
    let available = intr.pixel_count();
    if m == 0 || m > available {
        return Err(CameraError::BadCount { requested: m, available });
    }
    let w = intr.width as usize;
    Ok(rand::seq::index::sample(rng, available, m)
        .into_iter()
        .map(|idx| {
            let (u, v) = ((idx % w) as u32, (idx / w) as u32);
            PixelSample { u, v, color: image.get(u, v) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::{exp_map, Rotation, Twist};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn intr() -> CameraIntrinsics {
        CameraIntrinsics::new(80.0, 80.0, 48.0, 48.0, 96, 96).unwrap()
    }

    #[test]
    fn principal_ray_is_forward() {
        // Pixel center (47.5, 47.5) sits half a pixel off cx = 48; use cx on a center.
        let intr = CameraIntrinsics::new(80.0, 80.0, 47.5, 47.5, 96, 96).unwrap();
        let ray = pixel_to_ray(&intr, &Pose::identity(), 47, 47).unwrap();
        assert!((ray.direction - Vector3::z()).norm() < 1e-15);
        assert_eq!(ray.origin, Vector3::zeros());
    }

    #[test]
    fn focal_offset_pixel_is_45_degrees() {
        let intr = CameraIntrinsics::new(40.0, 40.0, 7.5, 7.5, 64, 16).unwrap();
        // u + 0.5 = cx + fx.
        let ray = pixel_to_ray(&intr, &Pose::identity(), 47, 7).unwrap();
        let expected = Vector3::new(1.0, 0.0, 1.0).normalize();
        assert!((ray.direction - expected).norm() < 1e-15);
    }

    #[test]
    fn rays_rotate_with_pose() {
        let intr = intr();
        let q = exp_map(&Twist::new(Vector3::new(0.1, -0.2, 0.3), Vector3::new(1.0, 2.0, 3.0)));
        let p = Pose::new(Rotation::from_yaw_pitch_roll(1.0, 0.2, -0.4), Vector3::new(0.5, 0.0, 0.0));
        for (u, v) in [(0, 0), (95, 0), (13, 77), (95, 95)] {
            let composed = pixel_to_ray(&intr, &(p * q), u, v).unwrap();
            let inner = pixel_to_ray(&intr, &q, u, v).unwrap();
            assert!((composed.direction - p.rotation * inner.direction).norm() < 1e-12);
            assert!((composed.direction.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_bounds_pixel() {
        assert!(matches!(
            pixel_to_ray(&intr(), &Pose::identity(), 96, 0),
            Err(CameraError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn invalid_intrinsics() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 4.0, 1.0, 4, 4).is_err());
    }

    #[test]
    fn exhaustive_sample_hits_each_pixel_once() {
        let intr = CameraIntrinsics::new(5.0, 5.0, 3.0, 2.0, 7, 5).unwrap();
        let img = Image::new(7, 5, Rgb::new(0.1, 0.2, 0.3));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = sample_pixels(&intr, &img, 35, &mut rng).unwrap();
        let mut seen = [false; 35];
        for p in &s {
            let i = (p.v * 7 + p.u) as usize;
            assert!(!seen[i]);
            seen[i] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn sampling_is_seeded() {
        let img = Image::new(96, 96, Rgb::zeros());
        let a = sample_pixels(&intr(), &img, 1, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = sample_pixels(&intr(), &img, 1, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_counts() {
        let img = Image::new(96, 96, Rgb::zeros());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(sample_pixels(&intr(), &img, 0, &mut rng), Err(CameraError::BadCount { .. })));
        assert!(sample_pixels(&intr(), &img, 96 * 96 + 1, &mut rng).is_err());
        let small = Image::new(10, 10, Rgb::zeros());
        assert!(matches!(sample_pixels(&intr(), &small, 4, &mut rng), Err(CameraError::SizeMismatch { .. })));
    }

    #[test]
    fn inclusion_frequency_is_uniform() {
        let intr = CameraIntrinsics::new(50.0, 50.0, 50.0, 50.0, 100, 100).unwrap();
        let img = Image::new(100, 100, Rgb::zeros());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (reps, m, n) = (100_000usize, 64usize, 10_000usize);
        let mut counts = vec![0u32; n];
        for _ in 0..reps {
            for p in sample_pixels(&intr, &img, m, &mut rng).unwrap() {
                counts[(p.v * 100 + p.u) as usize] += 1;
            }
        }
        let p = m as f64 / n as f64;
        let mean = reps as f64 * p;
        let se = (reps as f64 * p * (1.0 - p)).sqrt();
        // Per-pixel counts within 3 standard errors (a handful of 3σ excursions are
        // expected among 10⁴ pixels; allow 1%).
        let outliers = counts.iter().filter(|&&c| (c as f64 - mean).abs() > 3.0 * se).count();
        assert!(outliers < n / 100, "{outliers} pixels outside 3 SE");
        // Chi-square over all pixels: mean ≈ n − 1, sd ≈ √(2(n−1)).
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2) / (mean * (1.0 - p))).sum();
        let dof = (n - 1) as f64;
        assert!((chi2 - dof).abs() < 4.0 * (2.0 * dof).sqrt(), "chi2 {chi2}");
    }

    #[test]
    fn png_round_trip_quantizes() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = Image::new(3, 2, Rgb::new(0.0, 0.5, 1.0));
        img.set(2, 1, Rgb::new(0.25, 0.75, 0.1));
        let path = dir.path().join("x.png");
        img.save_png(&path).unwrap();
        let back = Image::load(&path).unwrap();
        assert!(back.mean_abs_diff(&img) < 0.5 / 255.0 + 1e-12);
    }
}
