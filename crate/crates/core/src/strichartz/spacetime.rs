use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::bilinear::{smooth_above, TrialStats};
use super::ensemble::{complex_gaussian, rng_for, trial_seed};
use crate::error::{Error, Result};
use crate::field::Spectrum;
use crate::freqbox::FreqBox;
use crate::grid::TorusGrid;
use crate::norms::hs_weight;
use crate::operators::p_symbol;

/// `⟨α⟩ = (1 + α²)^{1/2}`.
pub fn bracket(a: f64) -> f64 {
    (1.0 + a * a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Taper {
    /// `ψ(x) = exp(4 - 1/(x(1-x)))` on `x = t/T_w ∈ (0,1)`, peak value 1.
    Smooth,
    Flat,
}

impl Taper {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Taper::Flat => 1.0,
            Taper::Smooth => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    (4.0 - 1.0 / (x * (1.0 - x))).exp()
                }
            }
        }
    }
}

/// Time window `[0, T_w)` sampled at `nt` points `t_j = j T_w / nt`.
///
/// Time frequencies are angular: `τ_k = 2π k / T_w` for signed `k`, and the
/// transform is `ĉ(τ_k) = (Δt/√2π) Σ_j c(t_j) e^{-iτ_k t_j}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub length: f64,
    pub nt: usize,
    pub taper: Taper,
}

impl Window {
    pub fn new(length: f64, nt: usize, taper: Taper) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!("window length must be positive, got {length}")));
        }
        if nt < 2 || !nt.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("nt must be even and at least 2, got {nt}")));
        }
        Ok(Self { length, nt, taper })
    }

    /// `T_w = 2π L² · periods`, so every `P` symbol on `T²_L` lies on the `τ` lattice.
    pub fn aligned(l: f64, periods: u32, nt: usize, taper: Taper) -> Result<Self> {
        if periods == 0 {
            return Err(Error::InvalidParameter("periods must be at least 1".into()));
        }
        Self::new(2.0 * PI * l * l * periods as f64, nt, taper)
    }

    pub fn dt(&self) -> f64 {
        self.length / self.nt as f64
    }

    pub fn dtau(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }

    pub fn freq_index(&self, k: usize) -> i64 {
        if k < self.nt / 2 {
            k as i64
        } else {
            k as i64 - self.nt as i64
        }
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.freq_index(k) as f64 * self.dtau()
    }

    pub fn index_of(&self, k: i64) -> Option<usize> {
        let h = (self.nt / 2) as i64;
        if k >= -h && k < h {
            Some(if k >= 0 { k as usize } else { (k + self.nt as i64) as usize })
        } else {
            None
        }
    }

    pub fn taper_at(&self, j: usize) -> f64 {
        self.taper.eval(self.time(j) / self.length)
    }

    /// Discrete `‖ψ‖_{H^b}` of the taper on this window.
    pub fn taper_hb(&self, b: f64) -> f64 {
        let mut data: Vec<Complex64> = (0..self.nt).map(|j| Complex64::new(self.taper_at(j), 0.0)).collect();
        FftPlanner::new().plan_fft_forward(self.nt).process(&mut data);
        let c = self.dt() / (2.0 * PI).sqrt();
        let s: f64 = data
            .iter()
            .enumerate()
            .map(|(k, z)| bracket(self.tau(k)).powf(2.0 * b) * (z * c).norm_sqr())
            .sum();
        (s * self.dtau()).sqrt()
    }
}

/// Dyadic modulation band `R ≤ ⟨τ - p(m,n)⟩ < 2R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModBand {
    r: u64,
}

impl ModBand {
    pub fn new(r: u64) -> Result<Self> {
        if r == 0 || !r.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("band R must be a power of two, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn contains(&self, modulation: f64) -> bool {
        let w = bracket(modulation);
        let r = self.r as f64;
        w >= r && w < 2.0 * r
    }

    /// Bands `R = 1, 2, 4, …` whose union covers every modulation up to `max_modulation`.
    pub fn covering(max_modulation: f64) -> Vec<ModBand> {
        let top = bracket(max_modulation);
        let mut out = vec![ModBand { r: 1 }];
        while (2 * out.last().unwrap().r) as f64 <= top {
            let r = out.last().unwrap().r * 2;
            out.push(ModBand { r });
        }
        out
    }
}

/// Windowed space-time coefficients `ĉ_{m,n}(τ_k)`, stored mode-major in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSpectrum {
    grid: TorusGrid,
    window: Window,
    coeffs: Vec<Complex64>,
}

fn time_fft(coeffs: &mut [Complex64], nt: usize, forward: bool, factor: f64) {
    let mut planner = FftPlanner::new();
    let plan = if forward { planner.plan_fft_forward(nt) } else { planner.plan_fft_inverse(nt) };
    coeffs.par_chunks_mut(nt).for_each(|row| {
        plan.process(row);
        for z in row.iter_mut() {
            *z *= factor;
        }
    });
}

impl SpaceTimeSpectrum {
    pub fn zeros(grid: TorusGrid, window: Window) -> Self {
        Self { grid, window, coeffs: vec![Complex64::new(0.0, 0.0); grid.len() * window.nt] }
    }

    /// Tapers a coefficient trajectory sampled at the window nodes and transforms in time.
    pub fn from_trajectory(window: Window, samples: &[Spectrum]) -> Result<Self> {
        if samples.len() != window.nt {
            return Err(Error::ShapeMismatch { expected: window.nt, got: samples.len() });
        }
        let grid = *samples[0].grid();
        if samples.iter().any(|s| *s.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        let nt = window.nt;
        let mut out = Self::zeros(grid, window);
        for (j, s) in samples.iter().enumerate() {
            let w = window.taper_at(j);
            for (i, c) in s.coeffs().iter().enumerate() {
                out.coeffs[i * nt + j] = c * w;
            }
        }
        time_fft(&mut out.coeffs, nt, true, window.dt() / (2.0 * PI).sqrt());
        Ok(out)
    }

    /// `ψ(t) e^{itP} u₀` sampled on the window.
    pub fn free(u0: &Spectrum, window: Window) -> Self {
        let grid = *u0.grid();
        let nt = window.nt;
        let l = grid.scale();
        let mut out = Self::zeros(grid, window);
        for (i, ((m, n), c)) in u0.iter_modes().enumerate() {
            let p = p_symbol(l, m, n);
            for j in 0..nt {
                let t = window.time(j);
                out.coeffs[i * nt + j] = c * Complex64::from_polar(window.taper_at(j), p * t);
            }
        }
        time_fft(&mut out.coeffs, nt, true, window.dt() / (2.0 * PI).sqrt());
        out
    }

    /// Gaussian coefficients on every lattice point of `qbox × band` present on the grid.
    pub fn gaussian_on<R: Rng + ?Sized>(grid: TorusGrid, window: Window, qbox: &FreqBox, band: ModBand, rng: &mut R) -> Result<Self> {
        let mut out = Self::zeros(grid, window);
        let lb = qbox.resolve(grid.scale());
        let mut hit = false;
        for i in 0..grid.len() {
            let (m, n) = out.mode(i);
            if !lb.contains(m, n) {
                continue;
            }
            let p = p_symbol(grid.scale(), m, n);
            for k in 0..window.nt {
                if band.contains(window.tau(k) - p) {
                    out.coeffs[i * window.nt + k] = complex_gaussian(rng);
                    hit = true;
                }
            }
        }
        if !hit {
            return Err(Error::EmptySupport("box × band has no lattice points on the space-time grid".into()));
        }
        Ok(out)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn mode(&self, i: usize) -> (i64, i64) {
        let ny = self.grid.ny();
        (self.grid.freq_x(i / ny), self.grid.freq_y(i % ny))
    }

    /// Coefficient at spatial mode `(m, n)` and signed time frequency index `k`.
    pub fn get(&self, m: i64, n: i64, k: i64) -> Complex64 {
        match (self.grid.index_x(m), self.grid.index_y(n), self.window.index_of(k)) {
            (Some(i), Some(j), Some(kk)) => self.coeffs[(i * self.grid.ny() + j) * self.window.nt + kk],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, m: i64, n: i64, k: i64, value: Complex64) -> Result<()> {
        match (self.grid.index_x(m), self.grid.index_y(n), self.window.index_of(k)) {
            (Some(i), Some(j), Some(kk)) => {
                let nt = self.window.nt;
                self.coeffs[(i * self.grid.ny() + j) * nt + kk] = value;
                Ok(())
            }
            _ => Err(Error::InvalidParameter(format!("({m}, {n}, {k}) is not on the space-time grid"))),
        }
    }

    /// Visits `((m, n), τ_k - p(m,n), ĉ)` for every stored coefficient.
    pub fn iter_entries(&self) -> impl Iterator<Item = ((i64, i64), f64, Complex64)> + '_ {
        let nt = self.window.nt;
        let l = self.grid.scale();
        self.coeffs.iter().enumerate().map(move |(idx, c)| {
            let (m, n) = self.mode(idx / nt);
            ((m, n), self.window.tau(idx % nt) - p_symbol(l, m, n), *c)
        })
    }

    /// Multiplies each coefficient by `f((m, n), τ_k - p(m,n))`.
    pub fn map_multiplier(&self, f: impl Fn((i64, i64), f64) -> f64) -> Self {
        let mut out = self.clone();
        for (z, (mode, md, _)) in out.coeffs.iter_mut().zip(self.iter_entries()) {
            *z *= f(mode, md);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { coeffs, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { coeffs, ..self.clone() })
    }

    /// `Σ ĉ conj(d̂) Δτ`, the `L²_t L²_x` inner product on the window.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check(other)?;
        let s: Complex64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.window.dtau())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.window != other.window {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `‖·‖_{L²L²}` from the coefficients.
    pub fn l2l2(&self) -> f64 {
        (self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.window.dtau()).sqrt()
    }

    /// Coefficient trajectories `c(t_j)` at the window nodes (tapered data).
    pub fn time_samples(&self) -> Vec<Spectrum> {
        let nt = self.window.nt;
        let mut data = self.coeffs.clone();
        time_fft(&mut data, nt, false, self.window.dtau() / (2.0 * PI).sqrt());
        (0..nt)
            .map(|j| {
                let c = (0..self.grid.len()).map(|i| data[i * nt + j]).collect();
                Spectrum::new(self.grid, c).expect("shape matches grid")
            })
            .collect()
    }

    /// Node statistics of the physical field: `(max |u|, Σ Δt dA |u|², Σ Δt dA |u|⁴)`.
    pub fn node_stats(&self) -> NodeStats {
        let per: Vec<(f64, f64, f64)> = self
            .time_samples()
            .par_iter()
            .map(|s| {
                let f = s.inverse_transform();
                let mut mx = 0.0f64;
                let mut s2 = 0.0;
                let mut s4 = 0.0;
                for z in f.values() {
                    let a = z.norm_sqr();
                    mx = mx.max(a);
                    s2 += a;
                    s4 += a * a;
                }
                (mx.sqrt(), s2, s4)
            })
            .collect();
        let w = self.window.dt() * self.grid.cell_area();
        let mut out = NodeStats { linf: 0.0, l2l2: 0.0, l4l4: 0.0 };
        for (mx, s2, s4) in per {
            out.linf = out.linf.max(mx);
            out.l2l2 += s2;
            out.l4l4 += s4;
        }
        out.l2l2 = (out.l2l2 * w).sqrt();
        out.l4l4 = (out.l4l4 * w).powf(0.25);
        out
    }

    /// Largest `|τ_k - p(m,n)|` over modes carrying nonzero coefficients.
    pub fn max_modulation(&self) -> f64 {
        self.iter_entries().filter(|(_, _, c)| *c != Complex64::new(0.0, 0.0)).map(|(_, md, _)| md.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub linf: f64,
    pub l2l2: f64,
    pub l4l4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandProjection {
    pub spectrum: SpaceTimeSpectrum,
    pub empty_intersection: bool,
}

/// `Δ_Q u`: spatial box projection of space-time data.
pub fn delta_q(u: &SpaceTimeSpectrum, qbox: &FreqBox) -> BandProjection {
    project(u, qbox, None)
}

/// `Δ_{Q,R} u`: keeps `(m, n) ∈ Q` with `R ≤ ⟨τ - p(m,n)⟩ < 2R`.
pub fn delta_qr(u: &SpaceTimeSpectrum, qbox: &FreqBox, band: ModBand) -> BandProjection {
    project(u, qbox, Some(band))
}

fn project(u: &SpaceTimeSpectrum, qbox: &FreqBox, band: Option<ModBand>) -> BandProjection {
    let lb = qbox.resolve(u.grid.scale());
    let keep = |(m, n): (i64, i64), md: f64| lb.contains(m, n) && band.is_none_or(|b| b.contains(md));
    let spectrum = u.map_multiplier(|mode, md| if keep(mode, md) { 1.0 } else { 0.0 });
    let nt = u.window.nt;
    let empty = !(0..u.coeffs.len()).any(|idx| {
        let mode = u.mode(idx / nt);
        keep(mode, u.window.tau(idx % nt) - p_symbol(u.grid.scale(), mode.0, mode.1))
    });
    if empty {
        log::warn!("box × band misses the space-time lattice; projection is zero");
    }
    BandProjection { spectrum, empty_intersection: empty }
}

/// Discrete Bourgain norm
/// `(Σ_{m,n} (1+|k|²/L²)^s Σ_k ⟨τ_k - p(m,n)⟩^{2b} |ĉ_{m,n}(τ_k)|² Δτ)^{1/2}`.
pub fn xsb_norm(u: &SpaceTimeSpectrum, s: f64, b: f64) -> f64 {
    let l = u.grid.scale();
    let sum: f64 = u
        .iter_entries()
        .map(|((m, n), md, c)| hs_weight(l, m, n, s) * bracket(md).powf(2.0 * b) * c.norm_sqr())
        .sum();
    (sum * u.window.dtau()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRatio {
    pub ratio: f64,
    pub measured: f64,
    pub bound: f64,
    /// Lattice points of `Q` on the grid; the projected data live there.
    pub q_count: i64,
    pub r: u64,
    pub l2l2: f64,
}

fn band_setup(u: &SpaceTimeSpectrum, qbox: &FreqBox, band: ModBand) -> Result<(SpaceTimeSpectrum, i64, f64)> {
    let proj = delta_qr(u, qbox, band).spectrum;
    let l2 = proj.l2l2();
    if l2 == 0.0 {
        return Err(Error::ZeroDenominator("projected data vanish".into()));
    }
    let q = qbox.grid_count(u.grid());
    Ok((proj, q, l2))
}

/// `‖Δ_{Q,R}u‖_{L^∞L^∞} / ((|Q|/L²)^{1/2} R^{1/2} ‖Δ_{Q,R}u‖_{L²L²})`, maximum over space-time nodes.
pub fn linf_band_bound(u: &SpaceTimeSpectrum, qbox: &FreqBox, band: ModBand) -> Result<BandRatio> {
    let (proj, q, l2) = band_setup(u, qbox, band)?;
    let l = u.grid.scale();
    let bound = (q as f64 / (l * l)).sqrt() * (band.r() as f64).sqrt() * l2;
    let measured = proj.node_stats().linf;
    Ok(BandRatio { ratio: measured / bound, measured, bound, q_count: q, r: band.r(), l2l2: l2 })
}

/// `‖Δ_{Q,R}u‖_{L⁴L⁴} / ((|Q|/L²)^{1/4} R^{1/4} ‖Δ_{Q,R}u‖_{L²L²})` with node quadrature.
pub fn l4_band_bound(u: &SpaceTimeSpectrum, qbox: &FreqBox, band: ModBand) -> Result<BandRatio> {
    let (proj, q, l2) = band_setup(u, qbox, band)?;
    let l = u.grid.scale();
    let bound = (q as f64 / (l * l)).powf(0.25) * (band.r() as f64).powf(0.25) * l2;
    let measured = proj.node_stats().l4l4;
    Ok(BandRatio { ratio: measured / bound, measured, bound, q_count: q, r: band.r(), l2l2: l2 })
}

/// Window able to hold `box × band` data without wrap-around: aligned length, `nt` sized to the
/// modulation range plus the largest `|p|` in the box.
pub fn window_for_band(grid: &TorusGrid, qbox: &FreqBox, band: ModBand, periods: u32, taper: Taper) -> Result<Window> {
    let l = grid.scale();
    let lb = qbox.resolve(l);
    let (ex, ey) = lb.extent();
    let pmax = p_symbol(l, ex, 0).abs().max(p_symbol(l, 0, ey).abs());
    let reach = pmax + 2.0 * band.r() as f64 + 1.0;
    let len = 2.0 * PI * l * l * periods as f64;
    let need = (2.0 * reach * len / (2.0 * PI)).ceil() as usize + 2;
    Window::new(len, need + need % 2, taper)
}

/// Both band-bound ratios for `trials` Gaussian draws on `cube(q) × band(r)` over `T²_L`.
pub fn band_trials(scale: f64, q: f64, r: u64, periods: u32, trials: usize, seed: u64) -> Result<(TrialStats, TrialStats)> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial".into()));
    }
    let qbox = FreqBox::centered_cube(q)?;
    let band = ModBand::new(r)?;
    let (ex, ey) = qbox.resolve(scale).extent();
    let n = smooth_above(2 * ex.max(ey) as usize + 2);
    let grid = TorusGrid::new(scale, n, n)?;
    let window = window_for_band(&grid, &qbox, band, periods, Taper::Flat)?;
    let results: Result<Vec<(f64, f64, u64)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let tag = [scale.to_bits(), q.to_bits(), r, trial as u64];
            let u = SpaceTimeSpectrum::gaussian_on(grid, window, &qbox, band, &mut rng_for(seed, &tag))?;
            let a = linf_band_bound(&u, &qbox, band)?;
            let b = l4_band_bound(&u, &qbox, band)?;
            Ok((a.ratio, b.ratio, trial_seed(seed, &tag)))
        })
        .collect();
    let results = results?;
    let seeds: Vec<u64> = results.iter().map(|r| r.2).collect();
    Ok((
        TrialStats::from_ratios(results.iter().map(|r| r.0).collect(), seeds.clone()),
        TrialStats::from_ratios(results.iter().map(|r| r.1).collect(), seeds),
    ))
}
