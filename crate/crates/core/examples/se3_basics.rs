//! Exponential and logarithm maps, composition, exp-map noise and rotation
//! averaging on SE(3).

use nalgebra::Vector3;
use radiance_mcl::rng::seeded;
use radiance_mcl::se3::{exp_map, log_map, rotation_average, rotation_geodesic_deg, sample_noise, NoiseParams, Pose, Rotation, Twist};

fn main() {
    let xi = Twist::new(Vector3::new(0.1, -0.4, 0.25), Vector3::new(0.5, 0.0, -1.0));
    let pose = exp_map(&xi);
    let back = log_map(&pose).expect("angle below pi");
    println!("twist        {:?}", xi.to_array());
    println!("exp -> log   {:?}", back.to_array());
    println!("rotation angle {:.4} rad, translation {:?}", pose.rotation.angle(), pose.translation.as_slice());

    // Poses compose as camera-to-world transforms: `a * b` applies b in a's body frame.
    let step = Pose::new(Rotation::rot_y(0.1), Vector3::new(0.0, 0.0, 0.2));
    let mut walk = Pose::identity();
    for _ in 0..10 {
        walk = walk * step;
    }
    println!("ten body-frame steps end at {:?}, yaw {:.1} deg", walk.translation.as_slice(), walk.rotation.angle().to_degrees());

    // Perturb a pose with body-frame exp-map noise and average the rotations back.
    let mut rng = seeded(1);
    let noise = NoiseParams::new(5f64.to_radians(), 0.02);
    let cloud: Vec<Pose> = (0..500).map(|_| pose * exp_map(&sample_noise(&noise, &mut rng))).collect();
    let rotations: Vec<Rotation> = cloud.iter().map(|p| p.rotation).collect();
    let mean = rotation_average(&rotations, &vec![1.0; rotations.len()]).expect("clustered rotations");
    let centroid = cloud.iter().map(|p| p.translation).sum::<Vector3<f64>>() / cloud.len() as f64;
    println!(
        "500 noisy copies: mean rotation {:.3} deg from the original, centroid {:.4} m away",
        rotation_geodesic_deg(&mean, &pose.rotation),
        (centroid - pose.translation).norm()
    );
}
