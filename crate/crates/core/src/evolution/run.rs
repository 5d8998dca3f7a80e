use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{inverse_transform, Field, Spectrum};
use crate::grid::TorusGrid;
use crate::norms::{hs_weight, lp_norm, tail_fraction, Lp};

use super::config::SolverConfig;
use super::fit::{fit_rate_for, RateFit};
use super::stepper::Stepper;

/// Concentration radii as fractions of `L`.
pub const CONCENTRATION_RADII: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub mass: f64,
    /// `‖u‖_{H^s}` for each entry of the tracked exponent list.
    pub hs: Vec<f64>,
    pub linf: f64,
    /// `∫_0^t ‖u‖⁴_{L⁴} dτ` (midpoint rule, one node per step).
    pub l4_integral: f64,
    pub tail: f64,
    pub dt: f64,
    /// Mass fraction within each concentration radius of the density peak.
    pub concentration: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub s_list: Vec<f64>,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn hs_series(&self, idx: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.hs[idx]).collect()
    }

    /// Largest `|‖u(t)‖ - ‖u(0)‖|` over the samples.
    pub fn mass_drift(&self) -> f64 {
        let m0 = match self.samples.first() {
            Some(s) => s.mass,
            None => return 0.0,
        };
        self.samples.iter().map(|s| (s.mass - m0).abs()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupStatus {
    Completed,
    ResolutionLimitedBlowup,
    NormThreshold,
}

impl BlowupStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::ResolutionLimitedBlowup => "resolution_limited_blowup",
            Self::NormThreshold => "norm_threshold",
        }
    }

    pub fn is_blowup(&self) -> bool {
        !matches!(self, Self::Completed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub status: BlowupStatus,
    /// Index of the first sample that crossed a threshold.
    pub index: Option<usize>,
    pub stop_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub s: f64,
    pub theorem_range: bool,
    pub fit: Option<RateFit>,
    /// Why the fit is missing, when it is.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub status: BlowupStatus,
    pub stop_time: f64,
    /// Set when the state became non-finite.
    pub non_finite: bool,
    pub fits: Vec<ExponentFit>,
    /// `(t, fractions)` for each sample; radii are [`CONCENTRATION_RADII`] times `L`.
    pub concentration: Vec<(f64, Vec<f64>)>,
}

/// First threshold crossing along the samples: `norm_threshold` for `L∞ > linf_max`,
/// `resolution_limited_blowup` for tail fraction above `tail_max`.
pub fn detect_blowup(traj: &Trajectory, config: &SolverConfig) -> Detection {
    for (i, s) in traj.samples.iter().enumerate() {
        let status = if s.linf > config.linf_max {
            BlowupStatus::NormThreshold
        } else if s.tail > config.tail_max {
            BlowupStatus::ResolutionLimitedBlowup
        } else {
            continue;
        };
        return Detection { status, index: Some(i), stop_time: Some(s.t) };
    }
    Detection { status: BlowupStatus::Completed, index: None, stop_time: None }
}

/// Trailing window for rate fitting: contiguous samples with tail below `tail_max`,
/// non-decreasing values, within two decades of the window maximum.
pub fn fit_window(times: &[f64], values: &[f64], tails: &[f64], tail_max: f64) -> (usize, usize) {
    let mut end = values.len();
    while end > 0 && !(tails[end - 1] < tail_max && values[end - 1].is_finite()) {
        end -= 1;
    }
    if end == 0 {
        return (0, 0);
    }
    let mut start = end - 1;
    while start > 0
        && tails[start - 1] < tail_max
        && values[start - 1] <= values[start]
        && times[start - 1] < times[start]
    {
        start -= 1;
    }
    let vmax = values[end - 1];
    while start < end && values[start] < vmax / 100.0 {
        start += 1;
    }
    (start, end)
}

/// Fraction of mass within distance `r` (periodic) of the density maximum, for each `r`.
pub fn concentration(u: &Field, radii: &[f64]) -> Vec<f64> {
    let g = u.grid();
    let vals = u.values();
    let (peak, _) = vals
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (i, z)| if z.norm_sqr() > acc.1 { (i, z.norm_sqr()) } else { acc });
    let (pj, pk) = (peak / g.ny(), peak % g.ny());
    let period = g.period();
    let wrap = |d: f64| {
        let d = d.rem_euclid(period);
        d.min(period - d)
    };
    let total: f64 = vals.iter().map(|z| z.norm_sqr()).sum();
    let mut inside = vec![0.0; radii.len()];
    for j in 0..g.nx() {
        let dx = wrap(g.x(j) - g.x(pj));
        for k in 0..g.ny() {
            let dy = wrap(g.y(k) - g.y(pk));
            let r = (dx * dx + dy * dy).sqrt();
            let d = vals[j * g.ny() + k].norm_sqr();
            for (acc, &rad) in inside.iter_mut().zip(radii) {
                if r <= rad {
                    *acc += d;
                }
            }
        }
    }
    inside.iter().map(|v| if total > 0.0 { v / total } else { 0.0 }).collect()
}

/// Time integrator with diagnostics. Drive it with [`Simulation::advance_until`] (for
/// checkpointing) or [`Simulation::run`].
#[derive(Debug)]
pub struct Simulation {
    config: SolverConfig,
    grid: TorusGrid,
    stepper: Stepper,
    state: Spectrum,
    t: f64,
    steps: u64,
    l4acc: f64,
    linf: f64,
    last_dt: f64,
    next_sample: f64,
    weights: Vec<Vec<f64>>,
    last_norms: Vec<f64>,
    trajectory: Trajectory,
    non_finite: bool,
    stopped: Option<BlowupStatus>,
}

impl Simulation {
    pub fn new(u0: &Spectrum, config: &SolverConfig) -> Result<Self> {
        Self::resume(u0, 0.0, config)
    }

    /// Starts from `state` at time `t`. The accumulated `L⁴` integral restarts from zero.
    pub fn resume(state: &Spectrum, t: f64, config: &SolverConfig) -> Result<Self> {
        Self::resume_with_integral(state, t, 0.0, config)
    }

    /// Starts from `state` at time `t` with a known value of `∫_0^t ‖u‖⁴_{L⁴}`.
    pub fn resume_with_integral(state: &Spectrum, t: f64, l4_integral: f64, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        if *state.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!("start time must be finite and nonnegative, got {t}")));
        }
        let stepper = Stepper::new(grid, config);
        let mut state = state.clone();
        let tail0 = tail_fraction(&state, config.dealias);
        if tail0 > config.tail_max / 10.0 {
            log::warn!("initial data poorly resolved: tail fraction {tail0:.3e} exceeds tail_max/10");
        }
        let before = state.l2_norm();
        stepper.truncate(state.coeffs_mut());
        let lost = (before - state.l2_norm()).abs();
        if lost > 1e-12 * before.max(1.0) {
            log::warn!("truncation to the retained band changed the mass by {lost:.3e}");
        }
        let l = grid.scale();
        let weights = config
            .s_list
            .iter()
            .map(|&s| {
                let mut w = Vec::with_capacity(grid.len());
                for i in 0..grid.nx() {
                    for k in 0..grid.ny() {
                        w.push(hs_weight(l, grid.freq_x(i), grid.freq_y(k), s));
                    }
                }
                w
            })
            .collect();
        for &s in &config.s_list {
            if !SolverConfig::theorem_range(s) {
                log::info!("tracking s = {s} outside the well-posedness range (1/2, 1); excluded from checks");
            }
        }
        let mut sim = Self {
            config: config.clone(),
            grid,
            stepper,
            state,
            t,
            steps: 0,
            l4acc: l4_integral,
            linf: 0.0,
            last_dt: 0.0,
            next_sample: config.sample_interval * ((t / config.sample_interval + 1e-9).floor() + 1.0),
            weights,
            last_norms: Vec::new(),
            trajectory: Trajectory { s_list: config.s_list.clone(), samples: Vec::new() },
            non_finite: false,
            stopped: None,
        };
        sim.record();
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &Spectrum {
        &self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn is_finished(&self) -> bool {
        self.stopped.is_some() || self.t >= self.config.t_end
    }

    fn norms(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(self.state.coeffs()).map(|(w, c)| w * c.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    fn record(&mut self) {
        let u = inverse_transform(&self.state);
        let hs = self.norms();
        let radii: Vec<f64> = CONCENTRATION_RADII.iter().map(|f| f * self.grid.scale()).collect();
        let sample = Sample {
            t: self.t,
            mass: self.state.l2_norm(),
            hs: hs.clone(),
            linf: lp_norm(&u, Lp::Infinity),
            l4_integral: self.l4acc,
            tail: tail_fraction(&self.state, self.config.dealias),
            dt: self.last_dt,
            concentration: concentration(&u, &radii),
        };
        self.last_norms = hs;
        self.trajectory.samples.push(sample);
    }

    /// Integrates until `t_stop`, `t_end` or a stop condition, whichever comes first.
    pub fn advance_until(&mut self, t_stop: f64) {
        let t_stop = t_stop.min(self.config.t_end);
        let mut backup = self.state.clone();
        while self.stopped.is_none() && self.t < t_stop {
            let target = self.next_sample.min(t_stop);
            if self.config.adaptive {
                self.linf = self.stepper.linf(self.state.coeffs());
            }
            let mut dt = self.config.step_for(self.linf);
            let landing = self.t + dt >= target * (1.0 - 1e-14) - 1e-300;
            if landing {
                dt = target - self.t;
            }
            backup.coeffs_mut().copy_from_slice(self.state.coeffs());
            let mid = match self.stepper.step(self.state.coeffs_mut(), dt) {
                Ok(mid) => mid,
                Err(_) => {
                    self.state = backup.clone();
                    self.non_finite = true;
                    self.stopped = Some(BlowupStatus::ResolutionLimitedBlowup);
                    log::warn!("non-finite state after t = {}; stopping", self.t);
                    break;
                }
            };
            self.t = if landing { target } else { self.t + dt };
            self.steps += 1;
            self.last_dt = dt;
            self.l4acc += dt * mid.l4_pow4;

            let tail = tail_fraction(&self.state, self.config.dealias);
            let crossed = mid.linf > self.config.linf_max || tail > self.config.tail_max;
            let on_cadence = landing && self.t >= self.next_sample * (1.0 - 1e-14);
            let grew = self.config.growth_sample_ratio.is_some_and(|r| {
                self.norms().iter().zip(&self.last_norms).any(|(now, then)| *now > r * then)
            });
            if crossed || on_cadence || grew || self.t >= self.config.t_end {
                self.record();
                if on_cadence {
                    let k = (self.t / self.config.sample_interval).round() + 1.0;
                    self.next_sample = self.config.sample_interval * k;
                }
            }
            if crossed {
                let d = detect_blowup(&self.trajectory, &self.config);
                if d.status.is_blowup() {
                    self.stopped = Some(d.status);
                }
            }
        }
    }

    /// Integrates to `t_end` (or a stop condition) and produces the report.
    pub fn run(mut self) -> (Trajectory, BlowupReport) {
        self.advance_until(self.config.t_end);
        self.finish()
    }

    /// Stops the run where it is and builds the report.
    pub fn finish(self) -> (Trajectory, BlowupReport) {
        let status = match self.stopped {
            Some(s) => s,
            None => detect_blowup(&self.trajectory, &self.config).status,
        };
        let traj = self.trajectory;
        let fits = if status.is_blowup() { fit_exponents(&traj, self.config.tail_max) } else { Vec::new() };
        let concentration = traj.samples.iter().map(|s| (s.t, s.concentration.clone())).collect();
        let report = BlowupReport { status, stop_time: self.t, non_finite: self.non_finite, fits, concentration };
        (traj, report)
    }
}

/// Rate fits over the trailing window for each tracked exponent.
pub fn fit_exponents(traj: &Trajectory, tail_max: f64) -> Vec<ExponentFit> {
    let times = traj.times();
    let tails: Vec<f64> = traj.samples.iter().map(|s| s.tail).collect();
    traj.s_list
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let values = traj.hs_series(i);
            let (a, b) = fit_window(&times, &values, &tails, tail_max);
            let (fit, note) = if b - a < 8 {
                (None, Some(format!("fit window holds {} samples; at least 8 are needed", b - a)))
            } else {
                match fit_rate_for(&times[a..b], &values[a..b], s) {
                    Ok(f) => (Some(f), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            };
            ExponentFit { s, theorem_range: SolverConfig::theorem_range(s), fit, note }
        })
        .collect()
}

/// Runs `u0` under `config` to completion or stop.
pub fn run_simulation(u0: &Field, config: &SolverConfig) -> Result<(Trajectory, BlowupReport)> {
    if !u0.is_finite() {
        return Err(Error::InvalidParameter("initial data contains non-finite values".into()));
    }
    let sim = Simulation::new(&crate::field::transform(u0), config)?;
    Ok(sim.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::transform;
    use num_complex::Complex64;

    fn sample(t: f64, linf: f64, tail: f64) -> Sample {
        Sample { t, mass: 1.0, hs: vec![1.0], linf, l4_integral: 0.0, tail, dt: 0.0, concentration: vec![] }
    }

    fn traj(samples: Vec<Sample>) -> Trajectory {
        Trajectory { s_list: vec![0.7], samples }
    }

    #[test]
    fn detection_semantics() {
        let mut cfg = SolverConfig::new(1.0, 8, 8);
        cfg.linf_max = 10.0;
        cfg.tail_max = 1e-4;
        let flat = traj((0..5).map(|i| sample(i as f64, 1.0, 0.0)).collect());
        assert_eq!(detect_blowup(&flat, &cfg).status, BlowupStatus::Completed);
        let tail = traj(vec![sample(0.0, 1.0, 0.0), sample(1.0, 1.0, 0.1)]);
        assert_eq!(detect_blowup(&tail, &cfg).status, BlowupStatus::ResolutionLimitedBlowup);
        let mono = traj((0..6).map(|i| sample(i as f64 * 0.5, 4f64.powi(i), 0.0)).collect());
        let d = detect_blowup(&mono, &cfg);
        assert_eq!(d.status, BlowupStatus::NormThreshold);
        assert_eq!(d.index, Some(2));
        assert_eq!(d.stop_time, Some(1.0));
    }

    #[test]
    fn window_selection() {
        let times: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let mut values: Vec<f64> = (0..12).map(|i| 2f64.powi(i)).collect();
        let mut tails = vec![0.0; 12];
        tails[11] = 1.0;
        values[2] = 100.0;
        let (a, b) = fit_window(&times, &values, &tails, 1e-4);
        assert_eq!(b, 11);
        // the walk stops at the dip (index 3), then 2^3 = 8 < 1024/100 is trimmed
        assert_eq!(a, 4);
    }

    #[test]
    fn concentration_of_flat_and_peaked() {
        let g = TorusGrid::new(1.0, 32, 32).unwrap();
        let flat = Field::from_fn(g, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let c = concentration(&flat, &[0.5, 100.0]);
        assert!((c[0] - std::f64::consts::PI * 0.25 / (4.0 * std::f64::consts::PI.powi(2))).abs() < 0.02);
        assert!((c[1] - 1.0).abs() < 1e-15);
        let peaked = Field::from_fn(g, |x, y| Complex64::new((-20.0 * ((x - 1.0).powi(2) + (y - 2.0).powi(2))).exp(), 0.0)).unwrap();
        assert!(concentration(&peaked, &[0.5])[0] > 0.99);
    }

    fn smooth(g: TorusGrid, amp: f64) -> Field {
        Field::from_fn(g, |x, y| Complex64::new(amp * (1.0 + 0.5 * x.cos() * y.sin()), amp * 0.3 * (x + y).sin())).unwrap()
    }

    #[test]
    fn small_data_completes_and_conserves_mass() {
        let g = TorusGrid::new(1.0, 32, 32).unwrap();
        let mut cfg = SolverConfig::new(1.0, 32, 32);
        cfg.t_end = 1.0;
        cfg.sample_interval = 0.1;
        let (tr, rep) = run_simulation(&smooth(g, 0.2), &cfg).unwrap();
        assert_eq!(rep.status, BlowupStatus::Completed);
        assert!(tr.mass_drift() < 1e-8, "{}", tr.mass_drift());
        assert!((tr.last().unwrap().t - 1.0).abs() < 1e-12);
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        assert!(tr.samples.iter().all(|s| (0.0..=1.0).contains(&s.tail)));
        assert!(rep.fits.is_empty());
    }

    #[test]
    fn samples_on_cadence() {
        let g = TorusGrid::new(1.0, 16, 16).unwrap();
        let mut cfg = SolverConfig::new(1.0, 16, 16);
        cfg.t_end = 0.05;
        cfg.dt0 = 3e-3;
        cfg.sample_interval = 0.01;
        cfg.growth_sample_ratio = None;
        let (tr, _) = run_simulation(&smooth(g, 0.1), &cfg).unwrap();
        let t = tr.times();
        assert_eq!(t.len(), 6);
        for (i, ti) in t.iter().enumerate() {
            assert!((ti - 0.01 * i as f64).abs() < 1e-12, "{t:?}");
        }
    }

    #[test]
    fn resumed_run_matches_uninterrupted() {
        let g = TorusGrid::new(1.0, 16, 16).unwrap();
        let mut cfg = SolverConfig::new(1.0, 16, 16);
        cfg.t_end = 0.2;
        cfg.sample_interval = 0.05;
        let u0 = transform(&smooth(g, 1.0));
        let mut a = Simulation::new(&u0, &cfg).unwrap();
        a.advance_until(0.2);
        let mut b = Simulation::new(&u0, &cfg).unwrap();
        b.advance_until(0.1);
        let mut c = Simulation::resume(b.state(), b.time(), &cfg).unwrap();
        c.advance_until(0.2);
        assert_eq!(a.state(), c.state());
    }

    #[test]
    fn grid_mismatch_rejected() {
        let g = TorusGrid::new(1.0, 16, 16).unwrap();
        let cfg = SolverConfig::new(1.0, 32, 32);
        assert!(matches!(run_simulation(&smooth(g, 1.0), &cfg), Err(Error::GridMismatch)));
    }
}
