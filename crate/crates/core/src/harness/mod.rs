//! Experiment runner behind the command-line tool.
//!
//! Every command writes into one run directory and nothing else. Random
//! streams hang off the scenario seed, so a run is reproducible regardless
//! of the thread count. Only `steps.csv` carries wall-clock timings; the
//! summary files are byte-identical across re-runs.

mod records;
mod scenario;

pub use records::{median, pose_errors, read_steps, write_csv, write_steps, StepRecord, STEP_HEADER};
pub use scenario::{
    AlphaMode, CameraSpec, DatasetSpec, FilterSpec, InitConfig, MapSpec, OdometrySpec, RunSpec, Scenario, TrajectorySpec,
};

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};

use crate::camera::{CameraIntrinsics, Image};
use crate::field::{bake_voxels, render_image, RadianceField};
use crate::filter::{init_particles, position_spread, AnnealStage, ParticleFilter, ParticleSet};
use crate::motion::{
    constant_velocity_propagate, integrate_odometry, load_trajectory, perturbed_gt_odometry, save_trajectory,
    OdometrySegment, TrajectorySample,
};
use crate::rng::{derive_rng, derive_seed};
use crate::se3::Pose;
use records::opt_cell;

const FRAME_STREAM: u64 = 0x4652_414d;
const TRIAL_STREAM: u64 = 0x5452_4941;
const INIT_STREAM: u64 = 1;
const FILTER_STREAM: u64 = 2;
const ODOM_STREAM: u64 = 3;
const COMPARE_STREAM: u64 = 0x434d_5052;

const SCALE_CAVEAT: &str = "note: success thresholds are absolute (meters, degrees); scene scales differ between datasets, \
so ratios are not directly comparable with results on other scenes";

/// Options shared by every command.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub no_anneal: bool,
    pub threads: Option<usize>,
}

impl RunOptions {
    /// Applies the overrides to a scenario.
    pub fn apply(&self, sc: &mut Scenario) {
        if let Some(seed) = self.seed {
            sc.seed = seed;
        }
        if self.no_anneal {
            sc.filter.annealing = false;
        }
    }

    /// Runs `f` on a pool with the requested thread count (the global pool
    /// when none is requested).
    pub fn in_pool<T: Send>(&self, sc: &Scenario, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads.or(sc.threads) {
            None => Ok(f()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
                Ok(pool.install(f))
            }
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn snapshot(sc: &Scenario, out: &Path) -> Result<()> {
    std::fs::write(out.join("scenario.toml"), sc.to_toml()?).context("writing scenario snapshot")
}

/// Ground-truth image of frame `k`, rendered with its own random stream.
pub fn render_frame<F: RadianceField + ?Sized>(
    field: &F,
    sc: &Scenario,
    intr: &CameraIntrinsics,
    pose: &Pose,
    k: usize,
) -> Image {
    render_image(field, pose, intr, &sc.dataset_render, &mut derive_rng(sc.seed, FRAME_STREAM, k as u64))
}

pub fn frame_path(dir: &Path, k: usize) -> PathBuf {
    dir.join("images").join(format!("frame_{k:04}.png"))
}

/// Source of ground-truth images: a dataset directory or on-the-fly renders.
struct Frames<'a> {
    sc: &'a Scenario,
    map: &'a dyn RadianceField,
    intr: CameraIntrinsics,
    dir: Option<PathBuf>,
}

impl<'a> Frames<'a> {
    fn new(sc: &'a Scenario, map: &'a dyn RadianceField, intr: CameraIntrinsics) -> Self {
        let dir = sc.dataset.as_ref().and_then(|d| d.dir.clone());
        Self { sc, map, intr, dir }
    }

    fn get(&self, k: usize, pose: &Pose) -> Result<Image> {
        match &self.dir {
            Some(dir) => {
                let path = frame_path(dir, k);
                let img = Image::load(&path).with_context(|| format!("loading {}", path.display()))?;
                img.check_matches(&self.intr)?;
                Ok(img)
            }
            None => Ok(render_frame(self.map, self.sc, &self.intr, pose, k)),
        }
    }
}

fn scenario_trajectory(sc: &Scenario) -> Result<Vec<TrajectorySample>> {
    if let Some(dir) = sc.dataset.as_ref().and_then(|d| d.dir.as_ref()) {
        let path = dir.join("trajectory.txt");
        return load_trajectory(&path).with_context(|| format!("loading {}", path.display()));
    }
    sc.trajectory()
}

/// Bakes the (analytic) map to a voxel grid and renders the ground-truth
/// dataset along the trajectory.
///
/// Layout: `map.vox`, `trajectory.txt`, `images/frame_NNNN.png`,
/// `manifest.toml` and `scenario.toml`.
pub fn cmd_make_scene(sc: &Scenario, out: &Path) -> Result<()> {
    let scene = sc.analytic_scene().context("make-scene needs an analytic map")?;
    let intr = sc.intrinsics()?;
    let traj = sc.trajectory()?;
    let res = sc.dataset.as_ref().map_or(128, |d| d.voxel_resolution);
    ensure!(res >= 2, "voxel resolution must be at least 2");
    create_dir(&out.join("images"))?;
    snapshot(sc, out)?;
    bake_voxels(&scene, [res; 3])?.save(out.join("map.vox"))?;
    save_trajectory(out.join("trajectory.txt"), &traj)?;
    for (k, s) in traj.iter().enumerate() {
        render_frame(&scene, sc, &intr, &s.pose, k).save_png(frame_path(out, k))?;
    }
    let manifest = format!(
        "seed = {}\nframes = {}\nwidth = {}\nheight = {}\nvoxel_resolution = {res}\nmap = \"map.vox\"\ntrajectory = \"trajectory.txt\"\nimages = \"images/frame_NNNN.png\"\n",
        sc.seed,
        traj.len(),
        intr.width,
        intr.height
    );
    std::fs::write(out.join("manifest.toml"), manifest)?;
    Ok(())
}

/// Result of one single-image or global trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub frame: usize,
    pub truth: Pose,
    pub estimate: Pose,
    pub records: Vec<StepRecord>,
    /// First update count at which both errors were under the thresholds.
    pub first_success: Option<u64>,
    /// First update that ran with refined noise.
    pub trigger_update: Option<u64>,
    pub updates_after_trigger: u64,
    pub forward_passes_after_trigger: u64,
}

impl TrialResult {
    pub fn final_record(&self) -> &StepRecord {
        self.records.last().expect("a trial always has its initial record")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaticMode {
    SingleImage,
    Global,
}

/// Runs `updates` filter iterations on a fixed image. The motion model is
/// pure noise (identity odometry).
fn run_static_trial(
    sc: &Scenario,
    map: &dyn RadianceField,
    intr: CameraIntrinsics,
    trial: usize,
    frame: usize,
    truth: &Pose,
    image: &Image,
) -> Result<TrialResult> {
    let run = &sc.run;
    let tseed = derive_seed(sc.seed, TRIAL_STREAM, trial as u64);
    let mut irng = derive_rng(tseed, INIT_STREAM, 0);
    let spec = sc.init_spec(truth, &mut irng)?;
    let set = init_particles(&spec, sc.filter.n_init, &mut irng)?;
    let cfg = sc.filter_config(position_spread(&set));
    let mut filter = ParticleFilter::new(map, intr, cfg, set, derive_seed(tseed, FILTER_STREAM, 0))?;

    let (est0, _) = filter.estimate();
    let (r0, t0) = pose_errors(&est0, truth);
    let mut records = vec![StepRecord {
        step: 0,
        updates: 0,
        rot_err_deg: r0,
        trans_err_m: t0,
        spread_m: filter.spread(),
        n_particles: filter.particles().len(),
        wall_ms: 0.0,
        forward_passes: 0,
    }];
    let mut first_success = records[0].within(run.success_rot_deg, run.success_trans_m).then_some(0);
    let mut trigger_update = None;
    let (mut after_updates, mut after_passes) = (0, 0);
    let mut estimate = est0;
    for step in 1..=run.max_updates {
        let clock = Instant::now();
        let it = filter.iterate(&Pose::identity(), image)?;
        let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
        let stats = filter.stats();
        if trigger_update.is_none() && it.anneal.stage != AnnealStage::Init {
            trigger_update = Some(stats.updates);
        }
        if trigger_update.is_some() {
            after_updates += 1;
            after_passes += it.forward_passes;
        }
        estimate = it.estimate;
        let (rot, trans) = pose_errors(&it.estimate, truth);
        let rec = StepRecord {
            step,
            updates: stats.updates,
            rot_err_deg: rot,
            trans_err_m: trans,
            spread_m: it.spread_after,
            n_particles: it.particles,
            wall_ms,
            forward_passes: stats.forward_passes,
        };
        if first_success.is_none() && rec.within(run.success_rot_deg, run.success_trans_m) {
            first_success = Some(stats.updates);
        }
        records.push(rec);
    }
    Ok(TrialResult {
        trial,
        frame,
        truth: *truth,
        estimate,
        records,
        first_success,
        trigger_update,
        updates_after_trigger: after_updates,
        forward_passes_after_trigger: after_passes,
    })
}

pub const STATIC_SUMMARY_HEADER: &str = "trial,frame,success,first_success_update,init_rot_err_deg,init_trans_err_m,\
final_rot_err_deg,final_trans_err_m,updates,forward_passes,trigger_update,updates_after_trigger,forward_passes_after_trigger";

pub const CURVES_HEADER: &str = "update,mean_rot_err_deg,mean_trans_err_m,success_ratio";

/// Single-image or global localization trials. Trial `i` localizes frame
/// `i mod frames` of the trajectory.
pub fn cmd_static(sc: &Scenario, mode: StaticMode, out: &Path) -> Result<Vec<TrialResult>> {
    match (mode, &sc.init) {
        (StaticMode::SingleImage, Some(InitConfig::Local { .. })) | (StaticMode::Global, Some(InitConfig::Global { .. })) => {}
        (StaticMode::SingleImage, _) => bail!("single-image needs a local [init] section"),
        (StaticMode::Global, _) => bail!("global needs a global [init] section"),
    }
    let intr = sc.intrinsics()?;
    let map = sc.load_map()?;
    let traj = scenario_trajectory(sc)?;
    let frames = Frames::new(sc, map.as_ref(), intr);
    create_dir(out)?;
    snapshot(sc, out)?;

    let mut results = Vec::with_capacity(sc.run.trials);
    for trial in 0..sc.run.trials {
        let frame = trial % traj.len();
        let truth = traj[frame].pose;
        let image = frames.get(frame, &truth)?;
        let res = run_static_trial(sc, map.as_ref(), intr, trial, frame, &truth, &image)?;
        let dir = out.join("trials").join(format!("trial_{trial:03}"));
        create_dir(&dir)?;
        write_steps(&dir.join("steps.csv"), &res.records)?;
        results.push(res);
    }
    write_static_summary(sc, mode, out, &results)?;
    Ok(results)
}

fn write_static_summary(sc: &Scenario, mode: StaticMode, out: &Path, results: &[TrialResult]) -> Result<()> {
    let rows = results.iter().map(|r| {
        let (first, last) = (&r.records[0], r.final_record());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.frame,
            u8::from(r.first_success.is_some()),
            opt_cell(r.first_success),
            first.rot_err_deg,
            first.trans_err_m,
            last.rot_err_deg,
            last.trans_err_m,
            last.updates,
            last.forward_passes,
            opt_cell(r.trigger_update),
            r.updates_after_trigger,
            r.forward_passes_after_trigger
        )
    });
    write_csv(&out.join("summary.csv"), STATIC_SUMMARY_HEADER, rows)?;

    let n = results.len() as f64;
    let steps = sc.run.max_updates;
    let curves = (0..=steps).map(|u| {
        let mean = |f: fn(&StepRecord) -> f64| results.iter().map(|r| f(&r.records[u])).sum::<f64>() / n;
        let reached = results.iter().filter(|r| r.first_success.is_some_and(|s| s <= u as u64)).count();
        format!("{u},{},{},{}", mean(|s| s.rot_err_deg), mean(|s| s.trans_err_m), reached as f64 / n)
    });
    write_csv(&out.join("curves.csv"), CURVES_HEADER, curves)?;

    let samples = |f: fn(&TrialResult) -> Pose| -> Vec<TrajectorySample> {
        results.iter().map(|r| TrajectorySample { timestamp: r.trial as f64, pose: f(r) }).collect()
    };
    save_trajectory(out.join("estimates.txt"), &samples(|r| r.estimate))?;
    save_trajectory(out.join("truth.txt"), &samples(|r| r.truth))?;

    let successes = results.iter().filter(|r| r.first_success.is_some()).count();
    let label = match mode {
        StaticMode::SingleImage => "single-image",
        StaticMode::Global => "global",
    };
    let text = format!(
        "{label}: {successes}/{} trials reached < {} deg and < {} m within {} updates (annealing {})\n{SCALE_CAVEAT}\n",
        results.len(),
        sc.run.success_rot_deg,
        sc.run.success_trans_m,
        steps,
        if sc.filter.annealing { "on" } else { "off" }
    );
    std::fs::write(out.join("summary.txt"), text)?;
    Ok(())
}

/// Per-image sawtooth record of a tracking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageRecord {
    pub image: usize,
    pub pred_rot_err_deg: f64,
    pub pred_trans_err_m: f64,
    pub post_rot_err_deg: f64,
    pub post_trans_err_m: f64,
    /// Error of open-loop integrated odometry at this image.
    pub odom_rot_err_deg: f64,
    pub odom_trans_err_m: f64,
}

pub const IMAGES_HEADER: &str =
    "image,pred_rot_err_deg,pred_trans_err_m,post_rot_err_deg,post_trans_err_m,odom_rot_err_deg,odom_trans_err_m";

#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    pub run: usize,
    pub images: Vec<ImageRecord>,
    pub records: Vec<StepRecord>,
    pub estimates: Vec<TrajectorySample>,
    pub forward_passes: u64,
}

impl TrackResult {
    pub fn median_pred_trans(&self) -> f64 {
        median(&self.images.iter().map(|r| r.pred_trans_err_m).collect::<Vec<_>>())
    }

    pub fn median_post_trans(&self) -> f64 {
        median(&self.images.iter().map(|r| r.post_trans_err_m).collect::<Vec<_>>())
    }

    pub fn final_image(&self) -> &ImageRecord {
        self.images.last().expect("tracking covers at least one image")
    }

    /// Median post-update error strictly below median post-prediction error.
    pub fn sawtooth(&self) -> bool {
        self.median_post_trans() < self.median_pred_trans()
    }

    /// Final estimate closer to the truth than open-loop odometry.
    pub fn beats_odometry(&self) -> bool {
        let last = self.final_image();
        last.post_trans_err_m < last.odom_trans_err_m
    }
}

fn run_track(
    sc: &Scenario,
    map: &dyn RadianceField,
    intr: CameraIntrinsics,
    traj: &[TrajectorySample],
    images: &[Image],
    replay: Option<&[OdometrySegment]>,
    run: usize,
) -> Result<TrackResult> {
    let rseed = derive_seed(sc.seed, TRIAL_STREAM, run as u64);
    let odometry: Option<Vec<OdometrySegment>> = match (replay, sc.odometry_noise()) {
        (Some(segs), _) => Some(segs.to_vec()),
        (None, Some(noise)) => Some(perturbed_gt_odometry(traj, &noise, &mut derive_rng(rseed, ODOM_STREAM, 0))?),
        (None, None) => None,
    };
    let start = traj[0].pose;
    let mut irng = derive_rng(rseed, INIT_STREAM, 0);
    let set = match &sc.init {
        Some(_) => init_particles(&sc.init_spec(&start, &mut irng)?, sc.filter.n_init, &mut irng)?,
        None => ParticleSet::from_poses(vec![start; sc.filter.n_init]),
    };
    let cfg = sc.filter_config(position_spread(&set));
    let mut filter = ParticleFilter::new(map, intr, cfg, set, derive_seed(rseed, FILTER_STREAM, 0))?;

    let (est0, _) = filter.estimate();
    let (r0, t0) = pose_errors(&est0, &start);
    let mut records = vec![StepRecord {
        step: 0,
        updates: 0,
        rot_err_deg: r0,
        trans_err_m: t0,
        spread_m: filter.spread(),
        n_particles: filter.particles().len(),
        wall_ms: 0.0,
        forward_passes: 0,
    }];
    let mut used: Vec<OdometrySegment> = Vec::with_capacity(traj.len());
    let mut estimates: Vec<TrajectorySample> = Vec::with_capacity(traj.len());
    let mut rows = Vec::with_capacity(traj.len());
    for (k, (sample, image)) in traj.iter().zip(images).enumerate() {
        let odom = if k == 0 {
            Pose::identity()
        } else {
            let seg = match &odometry {
                Some(segs) => segs[k - 1],
                None => {
                    // Constant-velocity stand-in for a dynamics model.
                    let prev = estimates[k - 1].pose;
                    let prev2 = if k >= 2 { estimates[k - 2].pose } else { prev };
                    OdometrySegment { relative: constant_velocity_propagate(&prev, &prev2), dt: sample.timestamp - traj[k - 1].timestamp }
                }
            };
            used.push(seg);
            seg.relative
        };
        let clock = Instant::now();
        let out = filter.step(&odom, image)?;
        let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
        let predicted = out.iterations.first().map_or(out.estimate, |it| it.predicted);
        let stats = filter.stats();
        let mut passes = stats.forward_passes - out.iterations.iter().map(|it| it.forward_passes).sum::<u64>();
        let updates = stats.updates - out.iterations.len() as u64;
        let per_iter_ms = wall_ms / out.iterations.len().max(1) as f64;
        if out.iterations.is_empty() {
            let (rot, trans) = pose_errors(&out.estimate, &sample.pose);
            records.push(StepRecord {
                step: records.len(),
                updates,
                rot_err_deg: rot,
                trans_err_m: trans,
                spread_m: filter.spread(),
                n_particles: filter.particles().len(),
                wall_ms,
                forward_passes: passes,
            });
        }
        for (updates, it) in (updates + 1..).zip(&out.iterations) {
            passes += it.forward_passes;
            let (rot, trans) = pose_errors(&it.estimate, &sample.pose);
            records.push(StepRecord {
                step: records.len(),
                updates,
                rot_err_deg: rot,
                trans_err_m: trans,
                spread_m: it.spread_after,
                n_particles: it.particles,
                wall_ms: per_iter_ms,
                forward_passes: passes,
            });
        }
        let open_loop = *integrate_odometry(&start, &used).last().expect("start pose is always present");
        let (pr, pt) = pose_errors(&predicted, &sample.pose);
        let (qr, qt) = pose_errors(&out.estimate, &sample.pose);
        let (or, ot) = pose_errors(&open_loop, &sample.pose);
        rows.push(ImageRecord {
            image: k,
            pred_rot_err_deg: pr,
            pred_trans_err_m: pt,
            post_rot_err_deg: qr,
            post_trans_err_m: qt,
            odom_rot_err_deg: or,
            odom_trans_err_m: ot,
        });
        estimates.push(TrajectorySample { timestamp: sample.timestamp, pose: out.estimate });
    }
    Ok(TrackResult { run, images: rows, records, estimates, forward_passes: filter.stats().forward_passes })
}

pub const TRACK_SUMMARY_HEADER: &str = "run,median_pred_trans_err_m,median_post_trans_err_m,final_rot_err_deg,\
final_trans_err_m,odom_final_trans_err_m,sawtooth,beats_odometry,forward_passes";

/// Tracks the image sequence once per run, each run with its own odometry
/// noise and filter streams.
pub fn cmd_track(sc: &Scenario, out: &Path) -> Result<Vec<TrackResult>> {
    let intr = sc.intrinsics()?;
    let map = sc.load_map()?;
    let traj = scenario_trajectory(sc)?;
    let replay = sc.odometry_file()?;
    if let Some(segs) = &replay {
        ensure!(segs.len() + 1 == traj.len(), "odometry has {} segments for {} images", segs.len(), traj.len());
    }
    ensure!(sc.odometry.is_some(), "track needs an [odometry] section");
    let frames = Frames::new(sc, map.as_ref(), intr);
    let images = traj.iter().enumerate().map(|(k, s)| frames.get(k, &s.pose)).collect::<Result<Vec<_>>>()?;
    create_dir(out)?;
    snapshot(sc, out)?;

    let mut results = Vec::with_capacity(sc.run.trials);
    for run in 0..sc.run.trials {
        let res = run_track(sc, map.as_ref(), intr, &traj, &images, replay.as_deref(), run)?;
        let dir = out.join("runs").join(format!("run_{run:03}"));
        create_dir(&dir)?;
        write_steps(&dir.join("steps.csv"), &res.records)?;
        let rows = res.images.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.image, r.pred_rot_err_deg, r.pred_trans_err_m, r.post_rot_err_deg, r.post_trans_err_m, r.odom_rot_err_deg, r.odom_trans_err_m
            )
        });
        write_csv(&dir.join("images.csv"), IMAGES_HEADER, rows)?;
        save_trajectory(dir.join("estimates.txt"), &res.estimates)?;
        if run == 0 {
            save_trajectory(out.join("estimates.txt"), &res.estimates)?;
            save_trajectory(out.join("truth.txt"), &traj)?;
        }
        results.push(res);
    }

    let rows = results.iter().map(|r| {
        let last = r.final_image();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            r.run,
            r.median_pred_trans(),
            r.median_post_trans(),
            last.post_rot_err_deg,
            last.post_trans_err_m,
            last.odom_trans_err_m,
            u8::from(r.sawtooth()),
            u8::from(r.beats_odometry()),
            r.forward_passes
        )
    });
    write_csv(&out.join("summary.csv"), TRACK_SUMMARY_HEADER, rows)?;
    let good = results.iter().filter(|r| r.sawtooth() && r.beats_odometry()).count();
    let source = match &sc.odometry {
        Some(OdometrySpec::PerturbedGt { .. }) => "perturbed ground truth",
        Some(OdometrySpec::ConstantVelocity) => "constant-velocity propagation (a stand-in for a vehicle dynamics model)",
        Some(OdometrySpec::File { .. }) => "replayed file",
        None => unreachable!("checked above"),
    };
    let text = format!(
        "track: {good}/{} runs show the sawtooth and end closer to the truth than open-loop odometry\nodometry source: {source}\n{SCALE_CAVEAT}\n",
        results.len()
    );
    std::fs::write(out.join("summary.txt"), text)?;
    Ok(results)
}

pub const COMPARE_HEADER: &str = "index,mean_abs_error";

/// Renders the map from each estimated pose of a finished run next to the
/// render from the matching true pose. Both renders of pair `i` share one
/// random stream, so equal poses give pixel-identical images.
///
/// Reads `estimates.txt` and `truth.txt` from `run_dir`; writes
/// `compare/pair_NNNN.png` and `compare/compare.csv` under `out`.
pub fn cmd_render_compare(sc: &Scenario, run_dir: &Path, out: &Path) -> Result<Vec<f64>> {
    let intr = sc.intrinsics()?;
    let map = sc.load_map()?;
    let est_path = run_dir.join("estimates.txt");
    let truth_path = run_dir.join("truth.txt");
    let estimates = load_trajectory(&est_path).with_context(|| format!("loading {}", est_path.display()))?;
    let truths = load_trajectory(&truth_path).with_context(|| format!("loading {}", truth_path.display()))?;
    ensure!(estimates.len() == truths.len(), "estimates and truth differ in length");
    let dir = out.join("compare");
    create_dir(&dir)?;
    let mut errors = Vec::with_capacity(estimates.len());
    for (i, (e, t)) in estimates.iter().zip(&truths).enumerate() {
        let render = |pose: &Pose| {
            render_image(map.as_ref(), pose, &intr, &sc.dataset_render, &mut derive_rng(sc.seed, COMPARE_STREAM, i as u64))
        };
        let (img_e, img_t) = (render(&e.pose), render(&t.pose));
        errors.push(img_e.mean_abs_diff(&img_t));
        img_e.side_by_side(&img_t).save_png(dir.join(format!("pair_{i:04}.png")))?;
    }
    write_csv(&dir.join("compare.csv"), COMPARE_HEADER, errors.iter().enumerate().map(|(i, e)| format!("{i},{e}")))?;
    Ok(errors)
}
