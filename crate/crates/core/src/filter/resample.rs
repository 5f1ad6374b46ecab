use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Particle, ParticleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResamplingScheme {
    /// i.i.d. categorical draws.
    #[default]
    Multinomial,
    /// One uniform offset, `n` evenly spaced pointers.
    Systematic,
}

/// Draws `n` particles with replacement, with probability proportional to
/// weight. Output weights are `1/n`.
pub fn resample<R: Rng + ?Sized>(set: &ParticleSet, n: usize, scheme: ResamplingScheme, rng: &mut R) -> ParticleSet {
    assert!(n > 0, "cannot resample to zero particles");
    let mut cdf = Vec::with_capacity(set.len());
    let mut acc = 0.0;
    for p in &set.particles {
        acc += p.weight.max(0.0);
        cdf.push(acc);
    }
    let total = acc;
    assert!(total > 0.0, "resampling needs positive total weight");
    let pick = |u: f64| cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
    let indices: Vec<usize> = match scheme {
        ResamplingScheme::Multinomial => (0..n).map(|_| pick(rng.random::<f64>() * total)).collect(),
        ResamplingScheme::Systematic => {
            let offset: f64 = rng.random();
            (0..n).map(|k| pick((k as f64 + offset) / n as f64 * total)).collect()
        }
    };
    let w = 1.0 / n as f64;
    ParticleSet {
        particles: indices.into_iter().map(|i| Particle { pose: set.particles[i].pose, weight: w }).collect(),
        time_index: set.time_index,
        compositions: set.compositions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::se3::Pose;
    use nalgebra::Vector3;

    fn line(n: usize) -> ParticleSet {
        ParticleSet::from_poses((0..n).map(|i| Pose::from_translation(Vector3::new(i as f64, 0.0, 0.0))).collect())
    }

    fn index_of(p: &Particle) -> usize {
        p.pose.translation.x as usize
    }

    #[test]
    fn all_weight_on_one() {
        let mut set = line(6);
        let mut raw = vec![0.0; 6];
        raw[4] = 1.0;
        set.set_normalized_weights(&raw);
        for scheme in [ResamplingScheme::Multinomial, ResamplingScheme::Systematic] {
            let out = resample(&set, 9, scheme, &mut seeded(3));
            assert_eq!(out.len(), 9);
            assert!(out.particles.iter().all(|p| index_of(p) == 4 && p.weight == 1.0 / 9.0));
        }
    }

    #[test]
    fn output_size_follows_request() {
        let set = line(300);
        assert_eq!(resample(&set, 100, ResamplingScheme::Multinomial, &mut seeded(0)).len(), 100);
        assert_eq!(resample(&set, 600, ResamplingScheme::Systematic, &mut seeded(0)).len(), 600);
    }

    #[test]
    fn expected_copy_counts_match_weights() {
        let mut set = line(5);
        let w = [0.1, 0.4, 0.05, 0.25, 0.2];
        set.set_normalized_weights(&w);
        let n = 100_000;
        for scheme in [ResamplingScheme::Multinomial, ResamplingScheme::Systematic] {
            let out = resample(&set, n, scheme, &mut seeded(8));
            let mut counts = [0usize; 5];
            for p in &out.particles {
                counts[index_of(p)] += 1;
            }
            for i in 0..5 {
                let mean = n as f64 * w[i];
                let sd = (n as f64 * w[i] * (1.0 - w[i])).sqrt();
                assert!((counts[i] as f64 - mean).abs() < 3.0 * sd, "{scheme:?} {i}: {}", counts[i]);
            }
        }
    }
}
