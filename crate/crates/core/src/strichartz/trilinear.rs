use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bilinear::{smooth_above, TrialStats};
use super::ensemble::{complex_gaussian, rng_for, trial_seed};
use super::spacetime::{xsb_norm, SpaceTimeSpectrum, Taper, Window};
use crate::error::{Error, Result};
use crate::field::{transform, Field, Spectrum};
use crate::freqbox::FreqBox;
use crate::grid::TorusGrid;
use crate::operators::{apply_e, dealias_keeps, p_symbol};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrilinearConfig {
    pub s: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for TrilinearConfig {
    fn default() -> Self {
        Self { s: 0.75, b: 0.55, b_prime: 0.44 }
    }
}

impl TrilinearConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.b > 0.5 && self.b_prime > 0.0 && self.b_prime < 0.5 && self.b + self.b_prime < 1.0;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "need 0 < b' < 1/2 < b and b + b' < 1, got b = {}, b' = {}",
                self.b, self.b_prime
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrilinearRatio {
    /// `‖E(u₁u₂)u₃‖_{X^{s,-b'}} / Π ‖u_i‖_{X^{s,b}}`
    pub ratio: f64,
    /// Same with the plain product `u₁u₂u₃`.
    pub cubic_ratio: f64,
    pub numerator: f64,
    pub cubic_numerator: f64,
    pub denominator: f64,
}

/// Zeroes space modes outside the 2/3 band and time frequencies with `|k| > nt/3`.
pub fn dealias_spacetime(u: &SpaceTimeSpectrum) -> SpaceTimeSpectrum {
    let g = *u.grid();
    let w = *u.window();
    let kt = (w.nt / 3) as i64;
    let mut out = SpaceTimeSpectrum::zeros(g, w);
    for i in 0..g.nx() {
        for j in 0..g.ny() {
            let (m, n) = (g.freq_x(i), g.freq_y(j));
            if !dealias_keeps(&g, m, n) {
                continue;
            }
            for k in -kt..=kt {
                let c = u.get(m, n, k);
                if c != Complex64::new(0.0, 0.0) {
                    out.set(m, n, k, c).expect("inside grid");
                }
            }
        }
    }
    out
}

/// Same trigonometric polynomial on a finer space-time grid (same window length).
pub fn pad(u: &SpaceTimeSpectrum, nx: usize, ny: usize, nt: usize) -> Result<SpaceTimeSpectrum> {
    let g = u.grid().with_resolution(nx, ny)?;
    let w = Window::new(u.window().length, nt, Taper::Flat)?;
    let mut out = SpaceTimeSpectrum::zeros(g, w);
    let src = u.window();
    for (idx, c) in u.coeffs().iter().enumerate() {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let i = idx / src.nt;
        let (m, n) = (u.grid().freq_x(i / u.grid().ny()), u.grid().freq_y(i % u.grid().ny()));
        out.set(m, n, src.freq_index(idx % src.nt), *c)?;
    }
    Ok(out)
}

fn physical(u: &SpaceTimeSpectrum) -> Vec<Field> {
    u.time_samples().iter().map(|s| s.inverse_transform()).collect()
}

fn pointwise(a: &Field, b: &Field) -> Field {
    Field::new(*a.grid(), a.values().iter().zip(b.values()).map(|(x, y)| x * y).collect()).expect("same grid")
}

/// Ratio of `‖E(u₁u₂)u₃‖_{X^{s,-b'}}` to `Π‖u_i‖_{X^{s,b}}`, inputs dealiased and products formed
/// without aliasing on a doubled space-time grid.
pub fn trilinear_probe(u1: &SpaceTimeSpectrum, u2: &SpaceTimeSpectrum, u3: &SpaceTimeSpectrum, cfg: &TrilinearConfig) -> Result<TrilinearRatio> {
    cfg.validate()?;
    for u in [u2, u3] {
        if u.grid() != u1.grid() || u.window() != u1.window() {
            return Err(Error::GridMismatch);
        }
    }
    let us: Vec<SpaceTimeSpectrum> = [u1, u2, u3].iter().map(|u| dealias_spacetime(u)).collect();
    let denominator: f64 = us.iter().map(|u| xsb_norm(u, cfg.s, cfg.b)).product();
    if denominator == 0.0 {
        return Err(Error::ZeroDenominator("an input has zero X^{s,b} norm after dealiasing".into()));
    }
    let (g, w) = (*u1.grid(), *u1.window());
    let (nx, ny, nt) = (2 * g.nx(), 2 * g.ny(), 2 * w.nt);
    let padded: Result<Vec<_>> = us.iter().map(|u| pad(u, nx, ny, nt)).collect();
    let fields: Vec<Vec<Field>> = padded?.iter().map(physical).collect();
    let (e_traj, c_traj): (Vec<Spectrum>, Vec<Spectrum>) = (0..nt)
        .into_par_iter()
        .map(|j| {
            let f12 = pointwise(&fields[0][j], &fields[1][j]);
            let e12 = apply_e(&transform(&f12)).inverse_transform();
            (transform(&pointwise(&e12, &fields[2][j])), transform(&pointwise(&f12, &fields[2][j])))
        })
        .unzip();
    let pw = Window::new(w.length, nt, Taper::Flat)?;
    let numerator = xsb_norm(&SpaceTimeSpectrum::from_trajectory(pw, &e_traj)?, cfg.s, -cfg.b_prime);
    let cubic_numerator = xsb_norm(&SpaceTimeSpectrum::from_trajectory(pw, &c_traj)?, cfg.s, -cfg.b_prime);
    Ok(TrilinearRatio {
        ratio: numerator / denominator,
        cubic_ratio: cubic_numerator / denominator,
        numerator,
        cubic_numerator,
        denominator,
    })
}

/// Space-time grid for data with lattice extent `k` and modulation up to `r0`, leaving room for the 2/3 cutoffs.
pub fn probe_grid(scale: f64, extent: f64, r0: f64) -> Result<(TorusGrid, Window)> {
    let k = (extent * scale).floor() as usize;
    let n = smooth_above(3 * k);
    let grid = TorusGrid::new(scale, n, n)?;
    let pmax = p_symbol(scale, k as i64, 0);
    let len = 2.0 * PI * scale * scale;
    let kt = ((pmax + r0) * len / (2.0 * PI)).ceil() as usize;
    Ok((grid, Window::new(len, smooth_above(3 * kt), Taper::Flat)?))
}

/// Gaussian space-time coefficients on `qbox` with `|τ - p(m,n)| ≤ r0`.
pub fn gaussian_near_paraboloid<R: Rng + ?Sized>(grid: TorusGrid, window: Window, qbox: &FreqBox, r0: f64, rng: &mut R) -> Result<SpaceTimeSpectrum> {
    let lb = qbox.resolve(grid.scale());
    let mut out = SpaceTimeSpectrum::zeros(grid, window);
    let kt = (window.nt / 3) as i64;
    let mut hit = false;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            let (m, n) = (grid.freq_x(i), grid.freq_y(j));
            if !lb.contains(m, n) || !dealias_keeps(&grid, m, n) {
                continue;
            }
            let p = p_symbol(grid.scale(), m, n);
            for k in -kt..=kt {
                if (k as f64 * window.dtau() - p).abs() <= r0 {
                    out.set(m, n, k, complex_gaussian(rng))?;
                    hit = true;
                }
            }
        }
    }
    if !hit {
        return Err(Error::EmptySupport("no space-time lattice points near the paraboloid in the box".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrilinearSweep {
    pub scale: f64,
    /// Physical frequency extent `Max(|m|,|n|)/L` of the random data.
    pub extent: f64,
    /// Modulation half-width around `τ = p(m,n)`.
    pub modulation: f64,
    pub trials: usize,
    pub seed: u64,
    pub config: TrilinearConfig,
}

impl Default for TrilinearSweep {
    fn default() -> Self {
        Self { scale: 1.0, extent: 8.0, modulation: 2.0, trials: 200, seed: 0, config: TrilinearConfig::default() }
    }
}

/// Trilinear ratios for independent Gaussian inputs on the cube of the given extent.
pub fn trilinear_random(sweep: &TrilinearSweep) -> Result<TrialStats> {
    let (grid, window) = probe_grid(sweep.scale, sweep.extent, sweep.modulation)?;
    let cube = FreqBox::centered_cube(sweep.extent)?;
    let results: Result<Vec<(f64, u64)>> = (0..sweep.trials)
        .into_par_iter()
        .map(|trial| {
            let tag = [sweep.scale.to_bits(), sweep.extent.to_bits(), trial as u64];
            let mut rng = rng_for(sweep.seed, &tag);
            let mut draw = || gaussian_near_paraboloid(grid, window, &cube, sweep.modulation, &mut rng);
            let (a, b, c) = (draw()?, draw()?, draw()?);
            Ok((trilinear_probe(&a, &b, &c, &sweep.config)?.ratio, trial_seed(sweep.seed, &tag)))
        })
        .collect();
    let (ratios, seeds) = results?.into_iter().unzip();
    Ok(TrialStats::from_ratios(ratios, seeds))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialCase {
    pub low: f64,
    pub high: f64,
    pub max_ratio: f64,
}

/// Low-frequency `u₁, u₂` (cube of half-width `low`) against `u₃` on the shell `N₃ ≤ Max < 2N₃`,
/// for every dyadic `N₃` fitting in the extent.
pub fn trilinear_adversarial(sweep: &TrilinearSweep, lows: &[f64]) -> Result<Vec<AdversarialCase>> {
    let (grid, window) = probe_grid(sweep.scale, sweep.extent, sweep.modulation)?;
    let mut out = Vec::new();
    for &low in lows {
        let low_box = FreqBox::centered_cube(low)?;
        let mut n3 = 1.0;
        while 2.0 * n3 <= sweep.extent {
            let high_box = FreqBox::centered_shell(n3)?;
            let ratios: Result<Vec<f64>> = (0..sweep.trials)
                .into_par_iter()
                .map(|trial| {
                    let tag = [low.to_bits(), n3.to_bits(), trial as u64];
                    let mut rng = rng_for(sweep.seed ^ 0xA5A5, &tag);
                    let a = gaussian_near_paraboloid(grid, window, &low_box, sweep.modulation, &mut rng)?;
                    let b = gaussian_near_paraboloid(grid, window, &low_box, sweep.modulation, &mut rng)?;
                    let c = gaussian_near_paraboloid(grid, window, &high_box, sweep.modulation, &mut rng)?;
                    Ok(trilinear_probe(&a, &b, &c, &sweep.config)?.ratio)
                })
                .collect();
            let max_ratio = ratios?.into_iter().fold(0.0, f64::max);
            out.push(AdversarialCase { low, high: n3, max_ratio });
            n3 *= 2.0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::hs_weight;
    use crate::operators::e_symbol;
    use crate::strichartz::spacetime::bracket;
    use approx::assert_relative_eq;

    #[test]
    fn config_constraints() {
        assert!(TrilinearConfig::default().validate().is_ok());
        assert!(TrilinearConfig { s: 0.75, b: 0.5, b_prime: 0.45 }.validate().is_err());
        assert!(TrilinearConfig { s: 0.75, b: 0.6, b_prime: 0.45 }.validate().is_err());
    }

    #[test]
    fn atom_product_closed_form() {
        let l = 1.5;
        let g = TorusGrid::new(l, 24, 24).unwrap();
        let w = Window::aligned(l, 1, 48, Taper::Flat).unwrap();
        let (m, n, k) = (2i64, 1i64, 3i64);
        let a = Complex64::new(0.6, -0.8);
        let mut u = SpaceTimeSpectrum::zeros(g, w);
        u.set(m, n, k, a).unwrap();
        let cfg = TrilinearConfig::default();
        let r = trilinear_probe(&u, &u, &u, &cfg).unwrap();

        let tau = k as f64 * w.dtau();
        let amp = w.dtau() / (2.0 * PI).sqrt();
        let big_c = e_symbol(2 * m, 2 * n) * amp.powi(3) / (2.0 * PI * l).powi(2);
        let chat = w.length / (2.0 * PI).sqrt() * big_c;
        let num = (hs_weight(l, 3 * m, 3 * n, cfg.s) * bracket(3.0 * tau - p_symbol(l, 3 * m, 3 * n)).powf(-2.0 * cfg.b_prime) * w.dtau()).sqrt() * chat;
        let one = (hs_weight(l, m, n, cfg.s) * bracket(tau - p_symbol(l, m, n)).powf(2.0 * cfg.b) * w.dtau()).sqrt();
        assert_relative_eq!(r.numerator, num, max_relative = 1e-10);
        assert_relative_eq!(r.denominator, one.powi(3), max_relative = 1e-12);
        assert_relative_eq!(r.cubic_numerator, num / e_symbol(2 * m, 2 * n), max_relative = 1e-10);
    }

    #[test]
    fn padding_preserves_samples() {
        let (g, w) = probe_grid(1.0, 2.0, 1.0).unwrap();
        let u = gaussian_near_paraboloid(g, w, &FreqBox::centered_cube(2.0).unwrap(), 1.0, &mut rng_for(3, &[])).unwrap();
        let p = pad(&u, 2 * g.nx(), 2 * g.ny(), 2 * w.nt).unwrap();
        assert_relative_eq!(p.l2l2(), u.l2l2(), max_relative = 1e-14);
        assert_relative_eq!(xsb_norm(&p, 0.5, 0.55), xsb_norm(&u, 0.5, 0.55), max_relative = 1e-14);
    }

    #[test]
    fn random_ratios_finite_and_reproducible() {
        let sweep = TrilinearSweep { extent: 2.0, trials: 4, seed: 9, ..Default::default() };
        let a = trilinear_random(&sweep).unwrap();
        let b = trilinear_random(&sweep).unwrap();
        assert_eq!(a, b);
        assert!(a.ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let (g, w) = probe_grid(1.0, 2.0, 1.0).unwrap();
        let u = SpaceTimeSpectrum::zeros(g, w);
        assert!(trilinear_probe(&u, &u, &u, &TrilinearConfig::default()).is_err());
        let other = SpaceTimeSpectrum::zeros(g, Window::new(w.length, w.nt + 2, Taper::Flat).unwrap());
        assert!(matches!(trilinear_probe(&u, &u, &other, &TrilinearConfig::default()), Err(Error::GridMismatch)));
    }
}
