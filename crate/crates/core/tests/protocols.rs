mod common;

use std::path::Path;

use radiance_mcl::harness::{cmd_static, cmd_track, read_steps, Scenario, StaticMode, CURVES_HEADER};
use radiance_mcl::motion::load_trajectory;

#[test]
fn scenario_toml_round_trip() {
    let sc = common::with(
        "[init]\nkind = \"global\"\nhalf_extent = [1.0, 0.5, 1.0]\npitch_deg = 3.0\n\n[odometry]\nkind = \"perturbed_gt\"\nsigma_r_deg = 1.0\nsigma_t = 0.02\n",
    );
    assert_eq!(Scenario::from_toml(&sc.to_toml().unwrap()).unwrap(), sc);

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let sc = Scenario::load(&path).unwrap();
        assert_eq!(Scenario::from_toml(&sc.to_toml().unwrap()).unwrap(), sc, "{}", path.display());
    }
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(Scenario::from_toml(&format!("{}\n[extra]\nx = 1\n", common::BASE)).is_err());
    let typo = common::BASE.replace("pixels = 16", "pixel = 16");
    assert!(Scenario::from_toml(&typo).is_err());
}

#[test]
fn static_protocols_need_matching_init() {
    let out = tempfile::tempdir().unwrap();
    assert!(cmd_static(&common::base(), StaticMode::SingleImage, out.path()).is_err());
    let local = common::with("[init]\nkind = \"local\"\nrot_range_deg = 5.0\ntrans_range = 0.05\n");
    assert!(cmd_static(&local, StaticMode::Global, out.path()).is_err());
}

#[test]
fn single_image_from_truth_succeeds_at_step_zero() {
    let sc = common::with("[init]\nkind = \"local\"\nrot_range_deg = 0.0\ntrans_range = 0.0\n");
    let out = tempfile::tempdir().unwrap();
    let results = cmd_static(&sc, StaticMode::SingleImage, out.path()).unwrap();
    for r in &results {
        assert_eq!(r.first_success, Some(0));
        assert!(r.records[0].rot_err_deg < 1e-4 && r.records[0].trans_err_m < 1e-9, "{:?}", r.records[0]);
    }
}

#[test]
fn global_point_box_succeeds_immediately() {
    let sc = common::with("[init]\nkind = \"global\"\nhalf_extent = [0.0, 0.0, 0.0]\nyaw_range_deg = 0.0\n");
    let out = tempfile::tempdir().unwrap();
    let results = cmd_static(&sc, StaticMode::Global, out.path()).unwrap();
    assert!(results.iter().all(|r| r.first_success == Some(0)));
    let summary = std::fs::read_to_string(out.path().join("summary.txt")).unwrap();
    assert!(summary.contains("3/3"), "{summary}");
}

#[test]
fn tracking_without_updates_follows_odometry() {
    let mut sc = common::with("[odometry]\nkind = \"perturbed_gt\"\nsigma_r_deg = 0.0\nsigma_t = 0.0\n");
    sc.filter.updates_per_image = 0;
    sc.filter.sigma_r_init_deg = 0.0;
    sc.filter.sigma_t_init = 0.0;
    sc.run.trials = 1;
    let out = tempfile::tempdir().unwrap();
    let results = cmd_track(&sc, out.path()).unwrap();
    let run = &results[0];
    assert_eq!(run.forward_passes, 0);
    for img in &run.images {
        assert!((img.post_trans_err_m - img.odom_trans_err_m).abs() < 1e-9);
        assert!(img.post_trans_err_m < 1e-9 && img.post_rot_err_deg < 1e-4);
    }
    let estimates = load_trajectory(out.path().join("estimates.txt")).unwrap();
    let truth = load_trajectory(out.path().join("truth.txt")).unwrap();
    assert_eq!(estimates.len(), truth.len());
    for (e, t) in estimates.iter().zip(&truth) {
        assert!((e.pose.translation - t.pose.translation).norm() < 1e-9);
    }
}

#[test]
fn forward_passes_count_particles_pixels_and_samples() {
    let sc = common::with("[init]\nkind = \"local\"\nrot_range_deg = 20.0\ntrans_range = 0.2\n");
    let per_particle = (sc.filter.pixels * sc.render.samples_per_ray()) as u64;
    let out = tempfile::tempdir().unwrap();
    for r in cmd_static(&sc, StaticMode::SingleImage, out.path()).unwrap() {
        for w in r.records.windows(2) {
            assert_eq!(w[1].forward_passes - w[0].forward_passes, w[1].n_particles as u64 * per_particle);
        }
        let after: u64 = r.records.iter().filter(|s| r.trigger_update.is_some_and(|t| s.updates >= t)).map(|s| s.n_particles as u64 * per_particle).sum();
        assert_eq!(after, r.forward_passes_after_trigger);
    }
}

#[test]
fn curves_are_recomputable_from_step_files() {
    let sc = common::with("[init]\nkind = \"local\"\nrot_range_deg = 20.0\ntrans_range = 0.1\nperturb_center = true\n");
    let out = tempfile::tempdir().unwrap();
    let results = cmd_static(&sc, StaticMode::SingleImage, out.path()).unwrap();
    let steps: Vec<_> = (0..sc.run.trials)
        .map(|t| read_steps(&out.path().join(format!("trials/trial_{t:03}/steps.csv"))).unwrap())
        .collect();
    for (r, s) in results.iter().zip(&steps) {
        assert_eq!(s.len(), sc.run.max_updates + 1);
        assert_eq!(s.iter().map(|x| x.rot_err_deg).collect::<Vec<_>>(), r.records.iter().map(|x| x.rot_err_deg).collect::<Vec<_>>());
    }
    let text = std::fs::read_to_string(out.path().join("curves.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CURVES_HEADER));
    let n = steps.len() as f64;
    for (u, line) in lines.enumerate() {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let rot = steps.iter().map(|s| s[u].rot_err_deg).sum::<f64>() / n;
        let trans = steps.iter().map(|s| s[u].trans_err_m).sum::<f64>() / n;
        let ratio = steps.iter().filter(|s| s[..=u].iter().any(|x| x.within(sc.run.success_rot_deg, sc.run.success_trans_m))).count() as f64 / n;
        assert_eq!(f[0], u as f64);
        assert!((f[1] - rot).abs() < 1e-9 && (f[2] - trans).abs() < 1e-12 && f[3] == ratio, "update {u}: {line}");
    }
}

#[test]
fn custom_primitive_scene_parses() {
    let map = r#"
[map]
kind = "analytic"
bounds = [[-2.0, -2.0, 0.0], [2.0, 2.0, 4.0]]
primitives = [
  { shape = "sphere", center = [0.0, 0.0, 2.0], radius = 0.5, sigma = 40.0, color = [0.9, 0.2, 0.2] },
  { shape = "box", min = [-2.0, 1.0, 0.0], max = [2.0, 1.2, 4.0], sigma = 40.0, color = [0.5, 0.5, 0.5] },
]
"#;
    let text = common::BASE.replace("[map]\nkind = \"analytic\"\nbuiltin = \"triad\"\n", map).replace("[filter]\n", "[filter]\nresampling = \"systematic\"\n");
    let sc = Scenario::from_toml(&text).unwrap();
    assert_eq!(sc.analytic_scene().unwrap().primitives().len(), 2);
    assert_eq!(Scenario::from_toml(&sc.to_toml().unwrap()).unwrap(), sc);
}
