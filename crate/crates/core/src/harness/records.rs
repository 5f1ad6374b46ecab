//! Per-step records and the CSV files written into a run directory.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use crate::se3::{rotation_geodesic_deg, Pose};

pub const STEP_HEADER: &str = "step,updates,rot_err_deg,trans_err_m,spread_m,n_particles,wall_ms,forward_passes";

/// One row of `steps.csv`. `forward_passes` is cumulative over the trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub updates: u64,
    pub rot_err_deg: f64,
    pub trans_err_m: f64,
    pub spread_m: f64,
    pub n_particles: usize,
    pub wall_ms: f64,
    pub forward_passes: u64,
}

impl StepRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{}",
            self.step,
            self.updates,
            self.rot_err_deg,
            self.trans_err_m,
            self.spread_m,
            self.n_particles,
            self.wall_ms,
            self.forward_passes
        )
    }

    pub fn within(&self, rot_deg: f64, trans_m: f64) -> bool {
        self.rot_err_deg < rot_deg && self.trans_err_m < trans_m
    }
}

/// Geodesic rotation error in degrees and Euclidean translation error.
pub fn pose_errors(estimate: &Pose, truth: &Pose) -> (f64, f64) {
    (
        rotation_geodesic_deg(&estimate.rotation, &truth.rotation),
        (estimate.translation - truth.translation).norm(),
    )
}

pub fn write_csv<I, S>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut text = String::with_capacity(4096);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row.as_ref());
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_steps(path: &Path, records: &[StepRecord]) -> Result<()> {
    write_csv(path, STEP_HEADER, records.iter().map(StepRecord::csv_row))
}

/// Parses a `steps.csv` back into records.
pub fn read_steps(path: &Path) -> Result<Vec<StepRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    anyhow::ensure!(lines.next() == Some(STEP_HEADER), "{}: unexpected header", path.display());
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            anyhow::ensure!(f.len() == 8, "{}:{}: expected 8 fields", path.display(), i + 2);
            Ok(StepRecord {
                step: f[0].parse()?,
                updates: f[1].parse()?,
                rot_err_deg: f[2].parse()?,
                trans_err_m: f[3].parse()?,
                spread_m: f[4].parse()?,
                n_particles: f[5].parse()?,
                wall_ms: f[6].parse()?,
                forward_passes: f[7].parse()?,
            })
        })
        .collect()
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Empty string for `None`, for optional CSV cells.
pub fn opt_cell<T: std::fmt::Display>(v: Option<T>) -> String {
    let mut s = String::new();
    if let Some(v) = v {
        let _ = write!(s, "{v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn steps_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("steps.csv");
        let recs = vec![
            StepRecord { step: 0, updates: 0, rot_err_deg: 12.5, trans_err_m: 0.1, spread_m: 0.3, n_particles: 300, wall_ms: 0.0, forward_passes: 0 },
            StepRecord { step: 1, updates: 1, rot_err_deg: 0.1 + 0.2, trans_err_m: 1e-17, spread_m: 0.0, n_particles: 100, wall_ms: 12.25, forward_passes: 1228800 },
        ];
        write_steps(&path, &recs).unwrap();
        assert_eq!(read_steps(&path).unwrap(), recs);
    }
}
