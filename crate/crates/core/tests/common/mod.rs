#![allow(dead_code)]

use radiance_mcl::harness::Scenario;

/// Small triad scenario: 32x32 images, four orbit poses, three trials.
pub const BASE: &str = r#"
seed = 11

[map]
kind = "analytic"
builtin = "triad"

[camera]
width = 32
height = 32
fov_x_deg = 80.0

[trajectory]
kind = "orbit"
target = [0.0, 0.3, 2.5]
radius = 1.5
height = 0.7
half_angle_deg = 30.0
count = 4

[dataset]
voxel_resolution = 16

[filter]
n_init = 40
n_reduced = 20
pixels = 16
sigma_r_init_deg = 2.0
sigma_t_init = 0.05
alpha_mode = "absolute"
alpha_refine = 0.05
alpha_super_refine = 0.025

[run]
trials = 3
max_updates = 6
"#;

pub fn base() -> Scenario {
    Scenario::from_toml(BASE).expect("base scenario parses")
}

/// Base scenario with extra TOML sections appended.
pub fn with(extra: &str) -> Scenario {
    Scenario::from_toml(&format!("{BASE}\n{extra}")).expect("scenario parses")
}
