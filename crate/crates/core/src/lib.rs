//! Monte Carlo localization of a camera against a volumetric radiance-field
//! map.
//!
//! The map is any [`field::RadianceField`]; rendering follows the standard
//! alpha-compositing discretization of the volume rendering integral. The
//! filter in [`filter`] keeps a cloud of SE(3) pose hypotheses, predicts them
//! with odometry plus exp-map noise, weighs them by photometric agreement
//! between the camera image and map renders, resamples, and shrinks its noise
//! and particle count as the cloud contracts.
//!
//! Runnable examples, one per capability (`cargo run --release --example <name>`):
//!
//! - `se3_basics`: exp/log maps, composition, noise, rotation averaging
//! - `render_scene`: volume rendering of the built-in scene to PNG
//! - `bake_voxels`: baking analytic scenes into voxel grids
//! - `single_image`: the filter on one image from a wrong local prior
//! - `global_localization`: convergence from a box and full yaw prior
//! - `tracking`: odometry-driven tracking against dead reckoning
//! - `render_compare`: estimates rendered next to the ground truth
//! - `odometry_replay`: datasets and odometry files replayed through tracking

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod field;
pub mod filter;
pub mod harness;
pub mod motion;
pub mod rng;
pub mod se3;
