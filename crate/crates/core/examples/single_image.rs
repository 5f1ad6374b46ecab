//! Localizes one static image from a deliberately wrong local prior, driving
//! the particle filter directly.

use nalgebra::Vector3;
use radiance_mcl::camera::CameraIntrinsics;
use radiance_mcl::field::{render_image, AnalyticScene, RenderConfig};
use radiance_mcl::filter::{init_local, init_particles, AnnealConfig, FilterConfig, InitSpec, ParticleFilter, ResamplingScheme};
use radiance_mcl::harness::pose_errors;
use radiance_mcl::motion::orbit;
use radiance_mcl::rng::seeded;
use radiance_mcl::se3::Pose;

fn main() -> anyhow::Result<()> {
    let scene = AnalyticScene::triad();
    let intr = CameraIntrinsics::from_horizontal_fov(96, 96, 80.0)?;
    let truth = orbit(&Vector3::new(0.0, 0.3, 2.5), 1.5, 0.7, 40f64.to_radians(), 20, 1.0)[7].pose;
    let image = render_image(&scene, &truth, &intr, &RenderConfig::dataset_default(), &mut seeded(0));

    // The prior is centered on a perturbed copy of the truth, not the truth.
    let mut rng = seeded(42);
    let spread = InitSpec::Local { center: truth, rot_range: 40f64.to_radians(), trans_range: 0.1 };
    let center = init_local(&spread, 1, &mut rng)?.particles[0].pose;
    let prior = InitSpec::Local { center, rot_range: 40f64.to_radians(), trans_range: 0.1 };
    let set = init_particles(&prior, 300, &mut rng)?;

    let cfg = FilterConfig {
        anneal: AnnealConfig {
            sigma_r_init: 2f64.to_radians(),
            sigma_t_init: 0.05,
            alpha_refine: 0.05,
            alpha_super_refine: 0.025,
            n_init: 300,
            n_reduced: 100,
        },
        pixels: 64,
        resampling: ResamplingScheme::Multinomial,
        updates_per_image: 1,
        annealing: true,
        render: RenderConfig::filter_default(),
    };
    let mut filter = ParticleFilter::new(&scene, intr, cfg, set, 7)?;
    let (r0, t0) = pose_errors(&filter.estimate().0, &truth);
    println!("start: {r0:6.2} deg {t0:.3} m");
    for k in 1..=60 {
        let it = filter.iterate(&Pose::identity(), &image)?;
        let (r, t) = pose_errors(&it.estimate, &truth);
        if k % 5 == 0 {
            println!("update {k:>2}: {r:6.2} deg {t:.3} m  spread {:.3} m  {:?} with {} particles", it.spread_after, it.anneal.stage, it.particles);
        }
    }
    println!("{} forward passes", filter.stats().forward_passes);
    Ok(())
}
