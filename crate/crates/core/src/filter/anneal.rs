use serde::{Deserialize, Serialize};

use super::FilterError;
use crate::se3::NoiseParams;

/// Inputs of the particle annealing schedule. Thresholds are in meters of
/// position spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub sigma_r_init: f64,
    pub sigma_t_init: f64,
    pub alpha_refine: f64,
    pub alpha_super_refine: f64,
    pub n_init: usize,
    pub n_reduced: usize,
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        let bad = |m: &str| Err(FilterError::BadConfig(m.to_string()));
        if !(self.sigma_r_init >= 0.0 && self.sigma_t_init >= 0.0) {
            return bad("initial noise must be non-negative");
        }
        if !(0.0 < self.alpha_super_refine && self.alpha_super_refine < self.alpha_refine) {
            return bad("need 0 < alpha_super_refine < alpha_refine");
        }
        if !(0 < self.n_reduced && self.n_reduced <= self.n_init) {
            return bad("need 0 < n_reduced <= n_init");
        }
        Ok(())
    }

    pub fn initial_state(&self) -> AnnealState {
        AnnealState {
            sigma_r: self.sigma_r_init,
            sigma_t: self.sigma_t_init,
            n: self.n_init,
            stage: AnnealStage::Init,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AnnealStage {
    Init,
    Refine,
    SuperRefine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealState {
    pub sigma_r: f64,
    pub sigma_t: f64,
    pub n: usize,
    pub stage: AnnealStage,
}

impl AnnealState {
    pub fn noise(&self) -> NoiseParams {
        NoiseParams::new(self.sigma_r, self.sigma_t)
    }
}

/// Picks noise and particle budget from the current position spread.
///
/// Below `alpha_super_refine` the initial noise is quartered, below
/// `alpha_refine` it is halved, and both use `n_reduced` particles. Otherwise
/// the initial noise and `n_init` are restored. The stage is recomputed from
/// scratch on every call, so a growing spread undoes the refinement.
pub fn anneal(cfg: &AnnealConfig, spread: f64) -> AnnealState {
    let (divisor, n, stage) = if spread < cfg.alpha_super_refine {
        (4.0, cfg.n_reduced, AnnealStage::SuperRefine)
    } else if spread < cfg.alpha_refine {
        (2.0, cfg.n_reduced, AnnealStage::Refine)
    } else {
        (1.0, cfg.n_init, AnnealStage::Init)
    };
    AnnealState {
        sigma_r: cfg.sigma_r_init / divisor,
        sigma_t: cfg.sigma_t_init / divisor,
        n,
        stage,
    }
}
