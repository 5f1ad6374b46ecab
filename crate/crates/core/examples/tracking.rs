//! Tracks a camera along an orbit with noisy odometry and compares the
//! filter against open-loop dead reckoning.

use nalgebra::Vector3;
use radiance_mcl::camera::CameraIntrinsics;
use radiance_mcl::field::{render_image, AnalyticScene, RenderConfig};
use radiance_mcl::filter::{AnnealConfig, FilterConfig, ParticleFilter, ParticleSet, ResamplingScheme};
use radiance_mcl::harness::pose_errors;
use radiance_mcl::motion::{integrate_odometry, orbit, perturbed_gt_odometry};
use radiance_mcl::rng::seeded;
use radiance_mcl::se3::{NoiseParams, Pose};

fn main() -> anyhow::Result<()> {
    let scene = AnalyticScene::triad();
    let intr = CameraIntrinsics::from_horizontal_fov(96, 96, 80.0)?;
    let traj = orbit(&Vector3::new(0.0, 0.3, 2.5), 1.5, 0.7, 40f64.to_radians(), 20, 1.0);
    let odometry = perturbed_gt_odometry(&traj, &NoiseParams::new(1f64.to_radians(), 0.02), &mut seeded(5))?;
    let dead_reckoning = integrate_odometry(&traj[0].pose, &odometry);

    let cfg = FilterConfig {
        anneal: AnnealConfig {
            sigma_r_init: 0.5f64.to_radians(),
            sigma_t_init: 0.01,
            alpha_refine: 0.01,
            alpha_super_refine: 0.005,
            n_init: 200,
            n_reduced: 200,
        },
        pixels: 64,
        resampling: ResamplingScheme::Systematic,
        updates_per_image: 24,
        annealing: true,
        render: RenderConfig::filter_default(),
    };
    let set = ParticleSet::from_poses(vec![traj[0].pose; cfg.anneal.n_init]);
    let mut filter = ParticleFilter::new(&scene, intr, cfg, set, 9)?;
    println!("image  predicted   updated   odometry   (translation error, m)");
    for (k, s) in traj.iter().enumerate() {
        let image = render_image(&scene, &s.pose, &intr, &RenderConfig::dataset_default(), &mut seeded(100 + k as u64));
        let odom = if k == 0 { Pose::identity() } else { odometry[k - 1].relative };
        let out = filter.step(&odom, &image)?;
        let (_, pred) = pose_errors(&out.iterations[0].predicted, &s.pose);
        let (_, post) = pose_errors(&out.estimate, &s.pose);
        let (_, open) = pose_errors(&dead_reckoning[k], &s.pose);
        println!("{k:>5}  {pred:9.4}  {post:8.4}  {open:9.4}");
    }
    Ok(())
}
