use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{Aabb, FieldSample, RadianceField};
use crate::camera::Rgb;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Sphere { center: [f64; 3], radius: f64 },
    Box { min: [f64; 3], max: [f64; 3] },
}

impl Shape {
    fn contains(&self, p: &Vector3<f64>) -> bool {
        match self {
            Shape::Sphere { center, radius } => (p - Vector3::from(*center)).norm_squared() <= radius * radius,
            Shape::Box { min, max } => (0..3).all(|k| p[k] >= min[k] && p[k] <= max[k]),
        }
    }

    fn bounding_box(&self) -> Aabb {
        match self {
            Shape::Sphere { center, radius } => {
                let c = Vector3::from(*center);
                Aabb::new(c.add_scalar(-radius), c.add_scalar(*radius))
            }
            Shape::Box { min, max } => Aabb::new(Vector3::from(*min), Vector3::from(*max)),
        }
    }
}

/// A solid primitive with constant interior density and color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    #[serde(flatten)]
    pub shape: Shape,
    pub sigma: f64,
    pub color: [f64; 3],
}

/// Scene built from spheres and boxes.
///
/// Where primitives overlap the one with the largest sigma wins; ties go to
/// the earliest primitive.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticScene {
    primitives: Vec<Primitive>,
    bounds: Aabb,
    background: Option<Rgb>,
}

impl AnalyticScene {
    pub fn new(primitives: Vec<Primitive>, bounds: Aabb, background: Option<Rgb>) -> Result<Self, String> {
        for (i, p) in primitives.iter().enumerate() {
            if !(p.sigma >= 0.0) {
                return Err(format!("primitive {i}: sigma must be non-negative"));
            }
            if p.color.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(format!("primitive {i}: color outside [0, 1]"));
            }
            if !bounds.contains_box(&p.shape.bounding_box()) {
                return Err(format!("primitive {i} extends outside the scene bounds"));
            }
        }
        Ok(Self { primitives, bounds, background })
    }

    /// Three colored spheres over a gray floor.
    ///
    /// Red, green and blue spheres of radius 0.5 m and density 50 /m centered
    /// at (−1, 0, 2.5), (1, 0, 2.5) and (0, 1, 2.5); a floor slab just under
    /// the lowest sphere; bounds [−3, 3]³; black background.
    pub fn triad() -> Self {
        let sphere = |c: [f64; 3], color: [f64; 3]| Primitive {
            shape: Shape::Sphere { center: c, radius: 0.5 },
            sigma: 50.0,
            color,
        };
        let floor = Primitive {
            shape: Shape::Box { min: [-3.0, 1.5, -3.0], max: [3.0, 1.7, 3.0] },
            sigma: 50.0,
            color: [0.5, 0.5, 0.5],
        };
        Self::new(
            vec![
                sphere([-1.0, 0.0, 2.5], [0.9, 0.1, 0.1]),
                sphere([1.0, 0.0, 2.5], [0.1, 0.9, 0.1]),
                sphere([0.0, 1.0, 2.5], [0.1, 0.1, 0.9]),
                floor,
            ],
            Aabb::cube(3.0),
            None,
        )
        .expect("triad scene is valid")
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }
}

impl RadianceField for AnalyticScene {
    fn query(&self, position: &Vector3<f64>, _view_dir: &Vector3<f64>) -> FieldSample {
        if !self.bounds.contains(position) {
            return FieldSample::EMPTY;
        }
        let mut best: Option<&Primitive> = None;
        for p in &self.primitives {
            if p.shape.contains(position) && best.is_none_or(|b| p.sigma > b.sigma) {
                best = Some(p);
            }
        }
        match best {
            Some(p) => FieldSample { sigma: p.sigma, color: Vector3::from(p.color) },
            None => FieldSample::EMPTY,
        }
    }

    fn bounds(&self) -> Aabb {
        self.bounds
    }

    fn background(&self) -> Option<Rgb> {
        self.background
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_takes_max_sigma_then_first() {
        let a = Primitive { shape: Shape::Sphere { center: [0.0; 3], radius: 1.0 }, sigma: 5.0, color: [1.0, 0.0, 0.0] };
        let b = Primitive { shape: Shape::Box { min: [-0.5; 3], max: [0.5; 3] }, sigma: 9.0, color: [0.0, 1.0, 0.0] };
        let c = Primitive { sigma: 9.0, color: [0.0, 0.0, 1.0], ..b.clone() };
        let scene = AnalyticScene::new(vec![a, b, c], Aabb::cube(2.0), None).unwrap();
        let s = scene.query(&Vector3::zeros(), &Vector3::z());
        assert_eq!(s.sigma, 9.0);
        assert_eq!(s.color, Rgb::new(0.0, 1.0, 0.0));
        let s = scene.query(&Vector3::new(0.8, 0.0, 0.0), &Vector3::z());
        assert_eq!(s.color, Rgb::new(1.0, 0.0, 0.0));
        assert_eq!(scene.query(&Vector3::new(1.5, 1.5, 0.0), &Vector3::z()), FieldSample::EMPTY);
    }

    #[test]
    fn outside_bounds_is_empty() {
        let s = AnalyticScene::triad();
        assert_eq!(s.query(&Vector3::new(0.0, 1.6, 3.5), &Vector3::z()).sigma, 0.0);
        assert_eq!(s.query(&Vector3::new(0.0, 1.6, 2.9), &Vector3::z()).sigma, 50.0);
    }

    #[test]
    fn rejects_invalid_primitives() {
        let p = Primitive { shape: Shape::Sphere { center: [0.0; 3], radius: 3.0 }, sigma: 1.0, color: [0.5; 3] };
        assert!(AnalyticScene::new(vec![p.clone()], Aabb::cube(2.0), None).is_err());
        let neg = Primitive { sigma: -1.0, shape: Shape::Sphere { center: [0.0; 3], radius: 0.5 }, ..p };
        assert!(AnalyticScene::new(vec![neg], Aabb::cube(2.0), None).is_err());
    }
}
