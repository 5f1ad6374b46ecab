//! Dense voxel grid with trilinear interpolation between voxel centers
//! (density-weighted for color).
//!
//! File layout (all little-endian): the 6-byte magic `VOXRF1`, the
//! resolution as three `u32`, the bounds as six `f64`
//! (min x, y, z then max x, y, z), then `nx·ny·nz` records of four `f32`
//! `(sigma, r, g, b)` with x varying fastest.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use super::{Aabb, FieldSample, RadianceField};
use crate::camera::Rgb;

const MAGIC: &[u8; 6] = b"VOXRF1";

#[derive(Debug, Error)]
pub enum VoxelError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("not a voxel field file (bad magic)")]
    BadMagic,
    #[error("invalid voxel field: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelField {
    resolution: [usize; 3],
    bounds: Aabb,
    /// `(sigma, r, g, b)` per voxel, x fastest.
    data: Vec<[f32; 4]>,
}

impl VoxelField {
    pub fn new(resolution: [usize; 3], bounds: Aabb, data: Vec<[f32; 4]>) -> Result<Self, VoxelError> {
        if resolution.iter().any(|&n| n < 2) {
            return Err(VoxelError::Invalid("resolution must be at least 2 per axis".into()));
        }
        if data.len() != resolution.iter().product::<usize>() {
            return Err(VoxelError::Invalid(format!("expected {} voxels, got {}", resolution.iter().product::<usize>(), data.len())));
        }
        if (0..3).any(|k| !(bounds.max[k] > bounds.min[k])) {
            return Err(VoxelError::Invalid("bounds must have positive extent".into()));
        }
        if data.iter().any(|v| !(v[0] >= 0.0)) {
            return Err(VoxelError::Invalid("negative density".into()));
        }
        Ok(Self { resolution, bounds, data })
    }

    pub fn resolution(&self) -> [usize; 3] {
        self.resolution
    }

    pub fn data(&self) -> &[[f32; 4]] {
        &self.data
    }

    fn voxel_size(&self) -> Vector3<f64> {
        let e = self.bounds.extent();
        Vector3::new(
            e.x / self.resolution[0] as f64,
            e.y / self.resolution[1] as f64,
            e.z / self.resolution[2] as f64,
        )
    }

    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        let s = self.voxel_size();
        self.bounds.min + Vector3::new((i as f64 + 0.5) * s.x, (j as f64 + 0.5) * s.y, (k as f64 + 0.5) * s.z)
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution[0] * (j + self.resolution[1] * k)
    }

    pub fn voxel(&self, i: usize, j: usize, k: usize) -> [f32; 4] {
        self.data[self.index(i, j, k)]
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), VoxelError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), VoxelError> {
        w.write_all(MAGIC)?;
        for n in self.resolution {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for v in self.bounds.min.iter().chain(self.bounds.max.iter()) {
            w.write_all(&v.to_le_bytes())?;
        }
        for rec in &self.data {
            for x in rec {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, VoxelError> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, VoxelError> {
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(VoxelError::BadMagic);
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let mut resolution = [0usize; 3];
        for n in &mut resolution {
            r.read_exact(&mut b4)?;
            *n = u32::from_le_bytes(b4) as usize;
        }
        let mut corners = [0.0f64; 6];
        for c in &mut corners {
            r.read_exact(&mut b8)?;
            *c = f64::from_le_bytes(b8);
        }
        let count = resolution.iter().product::<usize>();
        let mut bytes = vec![0u8; count * 16];
        r.read_exact(&mut bytes)?;
        let data = bytes
            .chunks_exact(16)
            .map(|chunk| {
                let f = |o: usize| f32::from_le_bytes(chunk[o..o + 4].try_into().unwrap());
                [f(0), f(4), f(8), f(12)]
            })
            .collect();
        let bounds = Aabb::new(
            Vector3::new(corners[0], corners[1], corners[2]),
            Vector3::new(corners[3], corners[4], corners[5]),
        );
        Self::new(resolution, bounds, data)
    }
}

/// Continuous grid coordinate along one axis, clamped to the center lattice.
/// Coordinates within 1e-9 of a lattice point snap to it so that queries at
/// voxel centers return stored values exactly.
fn lattice_coord(p: f64, min: f64, size: f64, n: usize) -> (usize, f64) {
    let mut f = (p - min) / size - 0.5;
    let r = f.round();
    if (f - r).abs() < 1e-9 {
        f = r;
    }
    let f = f.clamp(0.0, (n - 1) as f64);
    let i0 = (f.floor() as usize).min(n - 2);
    (i0, f - i0 as f64)
}

impl RadianceField for VoxelField {
    fn query(&self, position: &Vector3<f64>, _view_dir: &Vector3<f64>) -> FieldSample {
        if !self.bounds.contains(position) {
            return FieldSample::EMPTY;
        }
        let s = self.voxel_size();
        let (i, fx) = lattice_coord(position.x, self.bounds.min.x, s.x, self.resolution[0]);
        let (j, fy) = lattice_coord(position.y, self.bounds.min.y, s.y, self.resolution[1]);
        let (k, fz) = lattice_coord(position.z, self.bounds.min.z, s.z, self.resolution[2]);
        // Color is weighted by density as well, so empty neighbors do not
        // darken surfaces; it falls back to plain weights where all are empty.
        let mut sigma = 0.0;
        let mut plain = Rgb::zeros();
        let mut weighted = Rgb::zeros();
        for (dk, wz) in [(0, 1.0 - fz), (1, fz)] {
            for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
                    let w = wx * wy * wz;
                    if w == 0.0 {
                        continue;
                    }
                    let v = self.data[self.index(i + di, j + dj, k + dk)];
                    let c = Rgb::new(v[1] as f64, v[2] as f64, v[3] as f64);
                    let ws = w * (v[0] as f64).max(0.0);
                    sigma += ws;
                    plain += c * w;
                    weighted += c * ws;
                }
            }
        }
        let color = if sigma > 0.0 { weighted / sigma } else { plain };
        FieldSample { sigma, color }
    }

    fn bounds(&self) -> Aabb {
        self.bounds
    }
}

/// Samples `field` at the voxel centers of a grid spanning its bounds.
pub fn bake_voxels<F: RadianceField + ?Sized>(field: &F, resolution: [usize; 3]) -> Result<VoxelField, VoxelError> {
    if resolution.iter().any(|&n| n < 2) {
        return Err(VoxelError::Invalid("resolution must be at least 2 per axis".into()));
    }
    let bounds = field.bounds();
    let shell = VoxelField {
        resolution,
        bounds,
        data: Vec::new(),
    };
    let [nx, ny, nz] = resolution;
    let dir = Vector3::z();
    let data: Vec<[f32; 4]> = (0..nz)
        .into_par_iter()
        .flat_map_iter(|k| {
            let shell = &shell;
            (0..ny).flat_map(move |j| {
                (0..nx).map(move |i| {
                    let s = field.query(&shell.voxel_center(i, j, k), &dir);
                    [s.sigma as f32, s.color.x as f32, s.color.y as f32, s.color.z as f32]
                })
            })
        })
        .collect();
    VoxelField::new(resolution, bounds, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AnalyticScene, ConstantField};

    #[test]
    fn constant_field_bakes_to_constant() {
        let f = ConstantField { sigma: 2.5, color: Rgb::new(0.25, 0.5, 0.75), bounds: Aabb::cube(1.0) };
        let v = bake_voxels(&f, [4, 5, 6]).unwrap();
        assert!(v.data().iter().all(|x| *x == [2.5, 0.25, 0.5, 0.75]));
        let q = v.query(&Vector3::new(0.33, -0.91, 0.5), &Vector3::z());
        assert!((q.sigma - 2.5).abs() < 1e-6);
    }

    #[test]
    fn rebake_is_fixed_point() {
        let v = bake_voxels(&AnalyticScene::triad(), [24, 20, 16]).unwrap();
        let again = bake_voxels(&v, [24, 20, 16]).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn interpolation_stays_in_corner_hull() {
        let v = bake_voxels(&AnalyticScene::triad(), [16, 16, 16]).unwrap();
        let s = v.voxel_size();
        for (i, j, k) in [(3, 5, 12), (7, 7, 13), (8, 11, 13)] {
            let lo = v.voxel_center(i, j, k);
            let p = lo + s.component_mul(&Vector3::new(0.3, 0.6, 0.8));
            let q = v.query(&p, &Vector3::z());
            let corners: Vec<[f32; 4]> = (0..8)
                .map(|c| v.voxel(i + (c & 1), j + ((c >> 1) & 1), k + (c >> 2)))
                .collect();
            let lo_s = corners.iter().map(|c| c[0]).fold(f32::INFINITY, f32::min) as f64;
            let hi_s = corners.iter().map(|c| c[0]).fold(0.0, f32::max) as f64;
            assert!(q.sigma >= lo_s - 1e-9 && q.sigma <= hi_s + 1e-9);
        }
        assert_eq!(v.query(&Vector3::new(0.0, 0.0, 3.1), &Vector3::z()), FieldSample::EMPTY);
    }

    #[test]
    fn file_round_trip_and_layout() {
        let v = bake_voxels(&AnalyticScene::triad(), [3, 2, 2]).unwrap();
        let mut bytes = Vec::new();
        v.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..6], b"VOXRF1");
        assert_eq!(bytes.len(), 6 + 12 + 48 + 12 * 16);
        assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 3);
        assert_eq!(f64::from_le_bytes(bytes[18..26].try_into().unwrap()), -3.0);
        assert_eq!(f64::from_le_bytes(bytes[42..50].try_into().unwrap()), 3.0);
        // Second record is voxel (1, 0, 0): x fastest.
        let rec1: Vec<f32> = (0..4).map(|c| f32::from_le_bytes(bytes[66 + 16 + 4 * c..70 + 16 + 4 * c].try_into().unwrap())).collect();
        assert_eq!(rec1, v.voxel(1, 0, 0).to_vec());
        let back = VoxelField::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(VoxelField::read_from(&mut &b"VOXRF2........"[..]), Err(VoxelError::BadMagic)));
        assert!(bake_voxels(&AnalyticScene::triad(), [1, 4, 4]).is_err());
    }

    #[test]
    fn surface_color_is_not_darkened_by_empty_neighbors() {
        let mut data = vec![[0.0f32, 0.0, 0.0, 0.0]; 8];
        data[1] = [40.0, 0.2, 0.6, 1.0];
        let v = VoxelField::new([2, 2, 2], Aabb::cube(1.0), data).unwrap();
        let q = v.query(&Vector3::new(0.1, -0.4, -0.3), &Vector3::z());
        assert!(q.sigma > 0.0 && q.sigma < 40.0);
        assert!((q.color - Rgb::new(0.2, 0.6, 1.0)).amax() < 1e-6);
    }
}
