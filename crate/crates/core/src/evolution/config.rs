use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TorusGrid;

/// Solver parameters. Construct with [`SolverConfig::new`] and adjust fields, then call
/// [`SolverConfig::validate`] (the driver validates again before running).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub scale: f64,
    pub nx: usize,
    pub ny: usize,
    /// Sobolev exponents whose norms are tracked and fitted.
    pub s_list: Vec<f64>,
    pub dt0: f64,
    pub t_end: f64,
    /// Sign in front of the nonlocal term; `+1` or `-1`.
    pub sigma: f64,
    pub e_enabled: bool,
    pub adaptive: bool,
    /// Lower clamp of the adaptive step as a fraction of `dt0`.
    pub dt_min_factor: f64,
    pub dealias: bool,
    pub linf_max: f64,
    pub tail_max: f64,
    /// Time between regular diagnostic samples.
    pub sample_interval: f64,
    /// Extra sample whenever a tracked norm has grown by this factor since the last
    /// sample; `None` disables growth-triggered sampling.
    pub growth_sample_ratio: Option<f64>,
}

impl SolverConfig {
    pub fn new(scale: f64, nx: usize, ny: usize) -> Self {
        Self {
            scale,
            nx,
            ny,
            s_list: vec![0.6, 0.8],
            dt0: 1e-3,
            t_end: 1.0,
            sigma: 1.0,
            e_enabled: true,
            adaptive: true,
            dt_min_factor: 1e-6,
            dealias: true,
            linf_max: 1e6,
            tail_max: 1e-4,
            sample_interval: 0.01,
            growth_sample_ratio: Some(1.05),
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.scale, self.nx, self.ny)
    }

    /// Checks every invariant and reports all violations together.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if let Err(Error::InvalidGrid(msg)) = self.grid() {
            bad.push(msg);
        }
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            bad.push(format!("dt0 must be positive, got {}", self.dt0));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            bad.push(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.sigma != 1.0 && self.sigma != -1.0 {
            bad.push(format!("sigma must be +1 or -1, got {}", self.sigma));
        }
        if !(self.tail_max > 0.0 && self.tail_max < 1.0) {
            bad.push(format!("tail_max must lie in (0, 1), got {}", self.tail_max));
        }
        if !(self.linf_max > 0.0) {
            bad.push(format!("linf_max must be positive, got {}", self.linf_max));
        }
        if !(self.dt_min_factor > 0.0 && self.dt_min_factor <= 1.0) {
            bad.push(format!("dt_min_factor must lie in (0, 1], got {}", self.dt_min_factor));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            bad.push(format!("sample_interval must be positive, got {}", self.sample_interval));
        }
        if let Some(r) = self.growth_sample_ratio {
            if !(r > 1.0) {
                bad.push(format!("growth_sample_ratio must exceed 1, got {r}"));
            }
        }
        for &s in &self.s_list {
            if !(s >= 0.0 && s.is_finite()) {
                bad.push(format!("Sobolev exponent {s} must be a nonnegative number"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(bad.join("; ")))
        }
    }

    /// Whether `s` lies in the local well-posedness range `(1/2, 1)`.
    pub fn theorem_range(s: f64) -> bool {
        s > 0.5 && s < 1.0
    }

    pub fn dt_min(&self) -> f64 {
        self.dt0 * self.dt_min_factor
    }

    /// Adaptive step `dt0 / (1 + ‖u‖²_∞)` clamped to `[dt_min, dt0]`.
    pub fn step_for(&self, linf: f64) -> f64 {
        if !self.adaptive {
            return self.dt0;
        }
        (self.dt0 / (1.0 + linf * linf)).clamp(self.dt_min(), self.dt0)
    }
}
