//! Scenario files: everything an experiment run needs, in TOML.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, Rgb};
use crate::field::{Aabb, AnalyticScene, Primitive, RadianceField, RenderConfig, VoxelField};
use crate::filter::{AnnealConfig, FilterConfig, InitSpec, ResamplingScheme};
use crate::motion::{load_odometry, load_trajectory, orbit, OdometrySegment, TrajectorySample};
use crate::rng::StreamRng;
use crate::se3::{NoiseParams, Pose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Root of every random stream in the run. There is no fallback to
    /// wall-clock entropy.
    pub seed: u64,
    pub map: MapSpec,
    pub camera: CameraSpec,
    /// Renderer used inside the filter.
    #[serde(default = "RenderConfig::filter_default")]
    pub render: RenderConfig,
    /// Renderer used for ground-truth images.
    #[serde(default = "RenderConfig::dataset_default")]
    pub dataset_render: RenderConfig,
    pub trajectory: TrajectorySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitConfig>,
    pub filter: FilterSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odometry: Option<OdometrySpec>,
    /// Worker threads for the parallel regions; `--threads` wins over this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// A built-in scene (`builtin = "triad"`) or an explicit primitive list.
    Analytic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        builtin: Option<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        primitives: Vec<Primitive>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<[[f64; 3]; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        background: Option<[f64; 3]>,
    },
    /// A baked voxel grid file.
    Voxel { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub width: u32,
    pub height: u32,
    /// Square pixels with the principal point at the image center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov_x_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    /// See [`crate::motion::orbit`].
    Orbit {
        target: [f64; 3],
        radius: f64,
        height: f64,
        half_angle_deg: f64,
        count: usize,
        #[serde(default = "one")]
        dt: f64,
    },
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    /// Directory written by `make-scene`. When set, ground-truth images are
    /// read from `<dir>/images` instead of being rendered on the fly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Grid resolution per axis used by `make-scene` when baking the map.
    #[serde(default = "default_voxel_resolution")]
    pub voxel_resolution: usize,
}

fn default_voxel_resolution() -> usize {
    128
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    /// Cloud of `center · exp(δ)` around a center pose.
    Local {
        rot_range_deg: f64,
        trans_range: f64,
        /// When true the center itself is the ground truth perturbed by one
        /// draw from the same distribution, so the prior mean is wrong.
        /// When false the cloud is centered on the ground truth.
        #[serde(default)]
        perturb_center: bool,
    },
    /// Box of positions around the ground-truth position (or around a
    /// perturbed copy of it), yaw around the ground-truth yaw. Pitch and
    /// roll default to the ground truth's, as with a gravity-aligned camera.
    Global {
        half_extent: [f64; 3],
        #[serde(default = "half_turn")]
        yaw_range_deg: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pitch_deg: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        roll_deg: Option<f64>,
        #[serde(default)]
        roll_pitch_range_deg: f64,
        /// When true the box center is the true position shifted by a
        /// uniform draw within `±half_extent` per axis.
        #[serde(default)]
        perturb_center: bool,
    },
}

fn half_turn() -> f64 {
    180.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// Thresholds are fractions of the spread of the initial cloud.
    #[default]
    Relative,
    /// Thresholds are meters.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub n_init: usize,
    pub n_reduced: usize,
    /// Pixels compared per update (M).
    pub pixels: usize,
    pub sigma_r_init_deg: f64,
    pub sigma_t_init: f64,
    #[serde(default)]
    pub alpha_mode: AlphaMode,
    #[serde(default = "default_alpha_refine")]
    pub alpha_refine: f64,
    #[serde(default = "default_alpha_super_refine")]
    pub alpha_super_refine: f64,
    #[serde(default)]
    pub resampling: ResamplingScheme,
    #[serde(default = "default_updates_per_image")]
    pub updates_per_image: usize,
    #[serde(default = "yes")]
    pub annealing: bool,
}

fn default_alpha_refine() -> f64 {
    0.1
}

fn default_alpha_super_refine() -> f64 {
    0.05
}

fn default_updates_per_image() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Trials for the single-image and global protocols, runs for tracking.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Update steps per trial for the single-image and global protocols.
    #[serde(default = "default_max_updates")]
    pub max_updates: usize,
    #[serde(default = "default_success_rot")]
    pub success_rot_deg: f64,
    #[serde(default = "default_success_trans")]
    pub success_trans_m: f64,
}

fn default_trials() -> usize {
    1
}

fn default_max_updates() -> usize {
    60
}

fn default_success_rot() -> f64 {
    5.0
}

fn default_success_trans() -> f64 {
    0.05
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            max_updates: default_max_updates(),
            success_rot_deg: default_success_rot(),
            success_trans_m: default_success_trans(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OdometrySpec {
    /// Ground-truth relative motion with body-frame exp-map noise.
    PerturbedGt { sigma_r_deg: f64, sigma_t: f64 },
    /// Repeats the relative motion between the two previous estimates.
    ConstantVelocity,
    /// Replays an odometry file.
    File { path: PathBuf },
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).context("parsing scenario")?;
        sc.validate()?;
        Ok(sc)
    }

    /// Reads a scenario and makes its relative paths relative to the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut sc = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        sc.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        sc.check_files()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let MapSpec::Voxel { path } = &mut self.map {
            fix(path);
        }
        if let TrajectorySpec::File { path } = &mut self.trajectory {
            fix(path);
        }
        if let Some(OdometrySpec::File { path }) = &mut self.odometry {
            fix(path);
        }
        if let Some(DatasetSpec { dir: Some(dir), .. }) = &mut self.dataset {
            fix(dir);
        }
    }

    /// Every file the scenario refers to must exist.
    pub fn check_files(&self) -> Result<()> {
        let mut files: Vec<&Path> = Vec::new();
        if let MapSpec::Voxel { path } = &self.map {
            files.push(path);
        }
        if let TrajectorySpec::File { path } = &self.trajectory {
            files.push(path);
        }
        if let Some(OdometrySpec::File { path }) = &self.odometry {
            files.push(path);
        }
        if let Some(DatasetSpec { dir: Some(dir), .. }) = &self.dataset {
            files.push(dir);
        }
        for f in files {
            if !f.exists() {
                bail!("referenced path {} does not exist", f.display());
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.intrinsics()?;
        self.render.validate().map_err(anyhow::Error::msg).context("[render]")?;
        self.dataset_render.validate().map_err(anyhow::Error::msg).context("[dataset_render]")?;
        if let TrajectorySpec::Orbit { count: 0, .. } = self.trajectory {
            bail!("trajectory has no poses");
        }
        if self.run.trials == 0 {
            bail!("run.trials must be positive");
        }
        // Thresholds are checked once the initial spread is known.
        let f = &self.filter;
        if f.pixels == 0 || f.n_reduced == 0 || f.n_reduced > f.n_init {
            bail!("filter needs pixels > 0 and 0 < n_reduced <= n_init");
        }
        if !(f.alpha_super_refine > 0.0 && f.alpha_super_refine < f.alpha_refine) {
            bail!("filter needs 0 < alpha_super_refine < alpha_refine");
        }
        if !(f.sigma_r_init_deg >= 0.0 && f.sigma_t_init >= 0.0) {
            bail!("filter noise must be non-negative");
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        let c = &self.camera;
        let intr = match (c.fov_x_deg, c.fx, c.fy, c.cx, c.cy) {
            (Some(fov), None, None, None, None) => CameraIntrinsics::from_horizontal_fov(c.width, c.height, fov)?,
            (None, Some(fx), Some(fy), Some(cx), Some(cy)) => CameraIntrinsics::new(fx, fy, cx, cy, c.width, c.height)?,
            _ => bail!("[camera] needs either fov_x_deg or all of fx, fy, cx, cy"),
        };
        Ok(intr)
    }

    pub fn analytic_scene(&self) -> Result<AnalyticScene> {
        let MapSpec::Analytic { builtin, primitives, bounds, background } = &self.map else {
            bail!("map is not analytic");
        };
        match builtin.as_deref() {
            Some("triad") if primitives.is_empty() && bounds.is_none() && background.is_none() => Ok(AnalyticScene::triad()),
            Some("triad") => bail!("builtin scenes take no primitives, bounds or background"),
            Some(other) => bail!("unknown builtin scene {other:?}"),
            None => {
                let [lo, hi] = bounds.context("an explicit analytic map needs bounds")?;
                let aabb = Aabb::new(Vector3::from(lo), Vector3::from(hi));
                AnalyticScene::new(primitives.clone(), aabb, background.map(Rgb::from)).map_err(anyhow::Error::msg)
            }
        }
    }

    pub fn load_map(&self) -> Result<Box<dyn RadianceField>> {
        Ok(match &self.map {
            MapSpec::Analytic { .. } => Box::new(self.analytic_scene()?),
            MapSpec::Voxel { path } => {
                Box::new(VoxelField::load(path).with_context(|| format!("loading voxel map {}", path.display()))?)
            }
        })
    }

    pub fn trajectory(&self) -> Result<Vec<TrajectorySample>> {
        let traj = match &self.trajectory {
            TrajectorySpec::Orbit { target, radius, height, half_angle_deg, count, dt } => {
                orbit(&Vector3::from(*target), *radius, *height, half_angle_deg.to_radians(), *count, *dt)
            }
            TrajectorySpec::File { path } => load_trajectory(path)?,
        };
        if traj.is_empty() {
            bail!("trajectory has no poses");
        }
        Ok(traj)
    }

    pub fn odometry_file(&self) -> Result<Option<Vec<OdometrySegment>>> {
        match &self.odometry {
            Some(OdometrySpec::File { path }) => Ok(Some(load_odometry(path)?)),
            _ => Ok(None),
        }
    }

    /// Initialization spec for a trial whose ground truth is `truth`.
    pub fn init_spec(&self, truth: &Pose, rng: &mut StreamRng) -> Result<InitSpec> {
        let cfg = self.init.as_ref().context("scenario has no [init] section")?;
        Ok(match *cfg {
            InitConfig::Local { rot_range_deg, trans_range, perturb_center } => {
                let around_truth = InitSpec::Local { center: *truth, rot_range: rot_range_deg.to_radians(), trans_range };
                let center = if perturb_center {
                    crate::filter::init_local(&around_truth, 1, rng)?.particles[0].pose
                } else {
                    *truth
                };
                InitSpec::Local { center, rot_range: rot_range_deg.to_radians(), trans_range }
            }
            InitConfig::Global { half_extent, yaw_range_deg, pitch_deg, roll_deg, roll_pitch_range_deg, perturb_center } => {
                let h = Vector3::from(half_extent);
                let mut center = truth.translation;
                if perturb_center {
                    for k in 0..3 {
                        if h[k] > 0.0 {
                            center[k] += rng.random_range(-h[k]..=h[k]);
                        }
                    }
                }
                let (yaw, pitch, roll) = truth.rotation.to_yaw_pitch_roll();
                InitSpec::Global {
                    box_min: center - h,
                    box_max: center + h,
                    yaw_center: yaw,
                    yaw_range: yaw_range_deg.to_radians(),
                    pitch: pitch_deg.map_or(pitch, f64::to_radians),
                    roll: roll_deg.map_or(roll, f64::to_radians),
                    roll_pitch_range: roll_pitch_range_deg.to_radians(),
                }
            }
        })
    }

    /// Filter configuration; relative thresholds are scaled by `initial_spread`.
    pub fn filter_config(&self, initial_spread: f64) -> FilterConfig {
        let f = &self.filter;
        let scale = match f.alpha_mode {
            AlphaMode::Absolute => 1.0,
            // A cloud with no spread would give zero thresholds; keep them
            // positive so such a cloud simply starts fully refined.
            AlphaMode::Relative => initial_spread.max(1e-12),
        };
        FilterConfig {
            anneal: AnnealConfig {
                sigma_r_init: f.sigma_r_init_deg.to_radians(),
                sigma_t_init: f.sigma_t_init,
                alpha_refine: f.alpha_refine * scale,
                alpha_super_refine: f.alpha_super_refine * scale,
                n_init: f.n_init,
                n_reduced: f.n_reduced,
            },
            pixels: f.pixels,
            resampling: f.resampling,
            updates_per_image: f.updates_per_image,
            annealing: f.annealing,
            render: self.render,
        }
    }

    pub fn odometry_noise(&self) -> Option<NoiseParams> {
        match self.odometry {
            Some(OdometrySpec::PerturbedGt { sigma_r_deg, sigma_t }) => Some(NoiseParams::new(sigma_r_deg.to_radians(), sigma_t)),
            _ => None,
        }
    }
}
