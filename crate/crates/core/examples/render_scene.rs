//! Renders the built-in triad scene from a few orbit poses and writes PNGs.
//!
//! Usage: `cargo run --release --example render_scene [out_dir]`

use std::path::PathBuf;

use nalgebra::Vector3;
use radiance_mcl::camera::CameraIntrinsics;
use radiance_mcl::field::{render_image, AnalyticScene, RenderConfig};
use radiance_mcl::motion::orbit;
use radiance_mcl::rng::seeded;

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("radiance-mcl/render_scene"), PathBuf::from);
    std::fs::create_dir_all(&out)?;
    let scene = AnalyticScene::triad();
    let intr = CameraIntrinsics::from_horizontal_fov(160, 120, 80.0)?;
    let cfg = RenderConfig::dataset_default();
    for (k, s) in orbit(&Vector3::new(0.0, 0.3, 2.5), 1.5, 0.7, 40f64.to_radians(), 5, 1.0).iter().enumerate() {
        let image = render_image(&scene, &s.pose, &intr, &cfg, &mut seeded(k as u64));
        let path = out.join(format!("view_{k}.png"));
        image.save_png(&path)?;
        let lit = image.pixels().iter().filter(|c| c.norm() > 0.0).count();
        println!("{}: {lit}/{} pixels hit the scene", path.display(), intr.pixel_count());
    }
    Ok(())
}
