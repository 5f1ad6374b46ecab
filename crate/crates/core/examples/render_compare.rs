//! Runs a short single-image experiment through the harness, then renders
//! each estimate next to its ground-truth view.
//!
//! Usage: `cargo run --release --example render_compare [out_dir]`

use std::path::PathBuf;

use radiance_mcl::harness::{cmd_render_compare, cmd_static, Scenario, StaticMode};

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("radiance-mcl/render_compare"), PathBuf::from);
    let mut sc = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/single_image.toml"))?;
    sc.run.trials = 4;
    let results = cmd_static(&sc, StaticMode::SingleImage, &out)?;
    let errors = cmd_render_compare(&sc, &out, &out)?;
    for (r, e) in results.iter().zip(&errors) {
        let last = r.final_record();
        println!(
            "trial {}: {:.2} deg {:.3} m -> mean abs pixel error {e:.4}",
            r.trial, last.rot_err_deg, last.trans_err_m
        );
    }
    println!("side-by-side images in {}", out.join("compare").display());
    Ok(())
}
