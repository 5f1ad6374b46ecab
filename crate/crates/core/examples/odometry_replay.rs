//! Writes an odometry file and a dataset, then replays both through the
//! tracking protocol from a scenario that points at them.
//!
//! Usage: `cargo run --release --example odometry_replay [out_dir]`

use std::path::PathBuf;

use radiance_mcl::harness::{cmd_make_scene, cmd_track, DatasetSpec, MapSpec, OdometrySpec, Scenario};
use radiance_mcl::motion::{load_odometry, perturbed_gt_odometry, save_odometry};
use radiance_mcl::rng::seeded;
use radiance_mcl::se3::NoiseParams;

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("radiance-mcl/odometry_replay"), PathBuf::from);
    let mut sc = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/track.toml"))?;
    sc.run.trials = 2;
    sc.filter.updates_per_image = 8;

    let data = out.join("dataset");
    cmd_make_scene(&sc, &data)?;
    let traj = sc.trajectory()?;
    let odometry = perturbed_gt_odometry(&traj, &NoiseParams::new(2f64.to_radians(), 0.03), &mut seeded(77))?;
    save_odometry(data.join("odometry.txt"), traj[0].timestamp, &odometry)?;
    assert_eq!(load_odometry(data.join("odometry.txt"))?.len(), odometry.len());

    // The replay reads the baked map, the stored frames and the odometry file.
    let mut replay = sc.clone();
    replay.map = MapSpec::Voxel { path: data.join("map.vox") };
    replay.dataset = Some(DatasetSpec { dir: Some(data.clone()), voxel_resolution: 128 });
    replay.odometry = Some(OdometrySpec::File { path: data.join("odometry.txt") });
    replay.check_files()?;

    for r in cmd_track(&replay, &out.join("run"))? {
        let last = r.final_image();
        println!(
            "run {}: final error {:.3} m (replayed odometry alone: {:.3} m), sawtooth {}",
            r.run,
            last.post_trans_err_m,
            last.odom_trans_err_m,
            r.sawtooth()
        );
    }
    Ok(())
}
