use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use radiance_mcl::harness::{cmd_make_scene, cmd_render_compare, cmd_static, cmd_track, RunOptions, Scenario, StaticMode};

/// Camera localization against a radiance-field map with a particle filter.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bake the analytic map to voxels and render the ground-truth dataset.
    MakeScene(Common),
    /// Localize single static images from a perturbed local prior.
    SingleImage(Common),
    /// Localize single static images from a box-and-yaw global prior.
    Global(Common),
    /// Track an image sequence with odometry.
    Track(Common),
    /// Render estimated and true poses of a finished run side by side.
    RenderCompare {
        #[command(flatten)]
        common: Common,
        /// Run directory holding estimates.txt and truth.txt (defaults to --out).
        #[arg(long)]
        run: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory; every output goes here.
    #[arg(long)]
    out: PathBuf,
    /// Keep the initial noise and particle count throughout.
    #[arg(long)]
    no_anneal: bool,
    /// Worker threads for the parallel regions.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<(Scenario, RunOptions)> {
        let opts = RunOptions { seed: self.seed, no_anneal: self.no_anneal, threads: self.threads };
        let mut sc = Scenario::load(&self.scenario)?;
        opts.apply(&mut sc);
        Ok((sc, opts))
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::MakeScene(c) => {
            let (sc, opts) = c.load()?;
            opts.in_pool(&sc, || cmd_make_scene(&sc, &c.out))??;
            println!("wrote dataset to {}", c.out.display());
        }
        Command::SingleImage(c) => run_static(&c, StaticMode::SingleImage)?,
        Command::Global(c) => run_static(&c, StaticMode::Global)?,
        Command::Track(c) => {
            let (sc, opts) = c.load()?;
            let results = opts.in_pool(&sc, || cmd_track(&sc, &c.out))??;
            let good = results.iter().filter(|r| r.sawtooth() && r.beats_odometry()).count();
            println!("{good}/{} runs: post-update below post-prediction and below odometry drift", results.len());
        }
        Command::RenderCompare { common, run } => {
            let (sc, opts) = common.load()?;
            let run_dir = run.unwrap_or_else(|| common.out.clone());
            let errors = opts.in_pool(&sc, || cmd_render_compare(&sc, &run_dir, &common.out))??;
            for (i, e) in errors.iter().enumerate() {
                println!("pair {i}: mean abs error {e:.6}");
            }
        }
    }
    Ok(())
}

fn run_static(c: &Common, mode: StaticMode) -> Result<()> {
    let (sc, opts) = c.load()?;
    let results = opts.in_pool(&sc, || cmd_static(&sc, mode, &c.out))?.context("run failed")?;
    let ok = results.iter().filter(|r| r.first_success.is_some()).count();
    println!("{ok}/{} trials converged; see {}", results.len(), c.out.join("summary.txt").display());
    Ok(())
}
