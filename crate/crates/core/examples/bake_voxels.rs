//! Bakes the analytic scene into voxel grids of increasing resolution, round
//! trips one through its file format and compares renders with the original.

use nalgebra::Vector3;
use radiance_mcl::camera::CameraIntrinsics;
use radiance_mcl::field::{bake_voxels, render_image, AnalyticScene, RenderConfig, VoxelField};
use radiance_mcl::motion::orbit;
use radiance_mcl::rng::seeded;

fn main() -> anyhow::Result<()> {
    let scene = AnalyticScene::triad();
    let intr = CameraIntrinsics::from_horizontal_fov(64, 64, 80.0)?;
    let cfg = RenderConfig::dataset_default();
    let pose = orbit(&Vector3::new(0.0, 0.3, 2.5), 1.5, 0.7, 0.5, 2, 1.0)[1].pose;
    let reference = render_image(&scene, &pose, &intr, &cfg, &mut seeded(0));
    for res in [32, 64, 128] {
        let grid = bake_voxels(&scene, [res; 3])?;
        let mae = render_image(&grid, &pose, &intr, &cfg, &mut seeded(0)).mean_abs_diff(&reference);
        println!("{res:>3}^3 grid: mean absolute render error {mae:.4}");
    }

    let path = std::env::temp_dir().join("radiance-mcl-example-grid.vox");
    let grid = bake_voxels(&scene, [48; 3])?;
    grid.save(&path)?;
    let loaded = VoxelField::load(&path)?;
    println!("{} bytes on disk, reload identical: {}", std::fs::metadata(&path)?.len(), loaded == grid);
    std::fs::remove_file(path)?;
    Ok(())
}
