use nalgebra::Vector3;
use rand::Rng;

use super::{FilterError, ParticleSet};
use crate::se3::{exp_map, Pose, Rotation, Twist};

/// How the initial particle cloud is drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// `center · exp(δ)` with every rotation component of `δ` uniform in
    /// `[−rot_range, rot_range]` (radians) and every translation component
    /// uniform in `[−trans_range, trans_range]` (meters).
    Local { center: Pose, rot_range: f64, trans_range: f64 },
    /// Positions uniform in a box; yaw uniform in `yaw_center ± yaw_range`;
    /// pitch and roll uniform within `roll_pitch_range` of the reference
    /// attitude. Angles are radians, see [`Rotation::from_yaw_pitch_roll`].
    Global {
        box_min: Vector3<f64>,
        box_max: Vector3<f64>,
        yaw_center: f64,
        yaw_range: f64,
        pitch: f64,
        roll: f64,
        roll_pitch_range: f64,
    },
}

impl InitSpec {
    pub fn validate(&self) -> Result<(), FilterError> {
        let bad = |m: &str| Err(FilterError::BadSpec(m.to_string()));
        match self {
            InitSpec::Local { rot_range, trans_range, .. } => {
                if !(*rot_range >= 0.0 && *trans_range >= 0.0) {
                    return bad("ranges must be non-negative");
                }
            }
            InitSpec::Global { box_min, box_max, yaw_range, roll_pitch_range, .. } => {
                if !(*yaw_range >= 0.0 && *roll_pitch_range >= 0.0) {
                    return bad("ranges must be non-negative");
                }
                if (0..3).any(|k| !(box_min[k] <= box_max[k])) {
                    return bad("position box is empty");
                }
            }
        }
        Ok(())
    }
}

fn symmetric<R: Rng + ?Sized>(rng: &mut R, range: f64) -> f64 {
    if range == 0.0 {
        0.0
    } else {
        rng.random_range(-range..=range)
    }
}

pub fn init_local<R: Rng + ?Sized>(spec: &InitSpec, n: usize, rng: &mut R) -> Result<ParticleSet, FilterError> {
    let InitSpec::Local { center, rot_range, trans_range } = spec else {
        return Err(FilterError::BadSpec("expected a local init spec".into()));
    };
    spec.validate()?;
    if n == 0 {
        return Err(FilterError::BadSpec("need at least one particle".into()));
    }
    let poses = (0..n)
        .map(|_| {
            let mut draw = |r: f64| Vector3::new(symmetric(rng, r), symmetric(rng, r), symmetric(rng, r));
            let rot = draw(*rot_range);
            let trans = draw(*trans_range);
            center.compose(&exp_map(&Twist::new(rot, trans)))
        })
        .collect();
    Ok(ParticleSet::from_poses(poses))
}

pub fn init_global<R: Rng + ?Sized>(spec: &InitSpec, n: usize, rng: &mut R) -> Result<ParticleSet, FilterError> {
    let InitSpec::Global { box_min, box_max, yaw_center, yaw_range, pitch, roll, roll_pitch_range } = spec else {
        return Err(FilterError::BadSpec("expected a global init spec".into()));
    };
    spec.validate()?;
    if n == 0 {
        return Err(FilterError::BadSpec("need at least one particle".into()));
    }
    let poses = (0..n)
        .map(|_| {
            let mut position = Vector3::zeros();
            for k in 0..3 {
                position[k] = if box_min[k] == box_max[k] { box_min[k] } else { rng.random_range(box_min[k]..=box_max[k]) };
            }
            let yaw = yaw_center + symmetric(rng, *yaw_range);
            let p = pitch + symmetric(rng, *roll_pitch_range);
            let r = roll + symmetric(rng, *roll_pitch_range);
            Pose::new(Rotation::from_yaw_pitch_roll(yaw, p, r), position)
        })
        .collect();
    Ok(ParticleSet::from_poses(poses))
}

pub fn init_particles<R: Rng + ?Sized>(spec: &InitSpec, n: usize, rng: &mut R) -> Result<ParticleSet, FilterError> {
    match spec {
        InitSpec::Local { .. } => init_local(spec, n, rng),
        InitSpec::Global { .. } => init_global(spec, n, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::se3::{log_map, rotation_geodesic_deg};

    fn local(rot: f64, trans: f64) -> InitSpec {
        InitSpec::Local {
            center: Pose::new(Rotation::from_yaw_pitch_roll(0.5, 0.1, 0.0), Vector3::new(1.0, -0.5, 0.2)),
            rot_range: rot,
            trans_range: trans,
        }
    }

    #[test]
    fn zero_ranges_collapse_to_center() {
        let spec = local(0.0, 0.0);
        let set = init_local(&spec, 10, &mut seeded(0)).unwrap();
        let InitSpec::Local { center, .. } = spec else { unreachable!() };
        assert!(set.poses().all(|p| *p == center));
        assert!(set.particles.iter().all(|p| p.weight == 0.1));
    }

    #[test]
    fn local_perturbations_respect_ranges() {
        let spec = local(40f64.to_radians(), 0.1);
        let set = init_local(&spec, 300, &mut seeded(1)).unwrap();
        let InitSpec::Local { center, .. } = spec else { unreachable!() };
        for p in set.poses() {
            let d = log_map(&center.inverse().compose(p)).unwrap();
            assert!(d.rot.amax() <= 40f64.to_radians() + 1e-9);
            assert!(d.trans.amax() <= 0.1 + 1e-9);
        }
    }

    #[test]
    fn local_translation_is_uniform() {
        // Zero rotation range so exp(δ) translates by δ_t exactly.
        let spec = InitSpec::Local { center: Pose::identity(), rot_range: 0.0, trans_range: 0.1 };
        let n = 100_000;
        let set = init_local(&spec, n, &mut seeded(6)).unwrap();
        for axis in 0..3 {
            let mut xs: Vec<f64> = set.poses().map(|p| p.translation[axis]).collect();
            xs.sort_by(f64::total_cmp);
            let d = xs
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let f = (x + 0.1) / 0.2;
                    (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
                })
                .fold(0.0, f64::max);
            assert!(d < 1.628 / (n as f64).sqrt(), "axis {axis}: D = {d}");
        }
    }

    #[test]
    fn global_point_box_without_yaw_range_is_degenerate() {
        let spec = InitSpec::Global {
            box_min: Vector3::new(0.5, 0.0, -1.0),
            box_max: Vector3::new(0.5, 0.0, -1.0),
            yaw_center: 0.3,
            yaw_range: 0.0,
            pitch: -0.1,
            roll: 0.0,
            roll_pitch_range: 0.0,
        };
        let set = init_global(&spec, 20, &mut seeded(0)).unwrap();
        let first = set.particles[0].pose;
        assert!(set.poses().all(|p| *p == first));
    }

    #[test]
    fn global_respects_box_and_attitude() {
        let spec = InitSpec::Global {
            box_min: Vector3::new(-0.5, -0.25, -1.75),
            box_max: Vector3::new(0.5, 0.25, 1.75),
            yaw_center: 0.0,
            yaw_range: std::f64::consts::PI,
            pitch: 0.0,
            roll: 0.0,
            roll_pitch_range: 2.5f64.to_radians(),
        };
        let set = init_global(&spec, 2000, &mut seeded(4)).unwrap();
        let mut yaw_hist = [0usize; 4];
        for p in set.poses() {
            let InitSpec::Global { box_min, box_max, .. } = &spec else { unreachable!() };
            assert!((0..3).all(|k| p.translation[k] >= box_min[k] && p.translation[k] <= box_max[k]));
            let (yaw, pitch, roll) = p.rotation.to_yaw_pitch_roll();
            assert!(pitch.abs() <= 2.5f64.to_radians() + 1e-9 && roll.abs() <= 2.5f64.to_radians() + 1e-9);
            yaw_hist[(((yaw + std::f64::consts::PI) / (std::f64::consts::FRAC_PI_2)) as usize).min(3)] += 1;
        }
        assert!(yaw_hist.iter().all(|&c| c > 400), "{yaw_hist:?}");
    }

    #[test]
    fn level_global_init_has_zero_roll_pitch() {
        let spec = InitSpec::Global {
            box_min: Vector3::repeat(-1.0),
            box_max: Vector3::repeat(1.0),
            yaw_center: 0.0,
            yaw_range: std::f64::consts::PI,
            pitch: 0.0,
            roll: 0.0,
            roll_pitch_range: 0.0,
        };
        let set = init_global(&spec, 100, &mut seeded(2)).unwrap();
        for p in set.poses() {
            // Camera x axis stays horizontal and y axis stays vertical.
            assert!((p.rotation * Vector3::x()).y.abs() < 1e-12);
            assert!(rotation_geodesic_deg(&p.rotation, &Rotation::rot_y(p.rotation.to_yaw_pitch_roll().0)) < 1e-4);
        }
    }

    #[test]
    fn wrong_mode_and_bad_ranges() {
        let mut rng = seeded(0);
        assert!(matches!(init_global(&local(0.1, 0.1), 5, &mut rng), Err(FilterError::BadSpec(_))));
        assert!(init_local(&local(-0.1, 0.1), 5, &mut rng).is_err());
        assert!(init_local(&local(0.1, 0.1), 0, &mut rng).is_err());
        let empty = InitSpec::Global {
            box_min: Vector3::repeat(1.0),
            box_max: Vector3::repeat(0.0),
            yaw_center: 0.0,
            yaw_range: 1.0,
            pitch: 0.0,
            roll: 0.0,
            roll_pitch_range: 0.0,
        };
        assert!(init_global(&empty, 5, &mut rng).is_err());
    }
}
