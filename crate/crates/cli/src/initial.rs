//! Initial data described by `[initial]`.

use std::f64::consts::PI;

use dstorus::evolution::SolverConfig;
use dstorus::exact::{sample_on_torus, Analytic, Cutoff, ProfileSpec};
use dstorus::strichartz::{gaussian_on_box, rng_for};
use dstorus::{transform, Field, FreqBox, Spectrum, TorusGrid};
use num_complex::Complex64;

use crate::config::{torus_center, InitialKind, InitialSpec};
use crate::error::{CliError, CliResult};

/// Tag that separates the initial-data stream from other uses of the run seed.
const RANDOM_TAG: u64 = 0x1d;

/// Default cutoff radii for ℝ² data: `πL/2` and `3πL/4`.
pub fn default_cutoff(scale: f64, r0: Option<f64>, r1: Option<f64>) -> Cutoff {
    Cutoff::Bump { r0: r0.unwrap_or(PI * scale / 2.0), r1: r1.unwrap_or(0.75 * PI * scale) }
}

fn scaled_profile(p: &ProfileSpec, a: f64) -> ProfileSpec {
    ProfileSpec {
        mean: a * p.mean,
        cos: p.cos.iter().map(|c| a * c).collect(),
        sin: p.sin.iter().map(|c| a * c).collect(),
    }
}

/// Builds the initial spectrum. Hyperbolic data scale the profile, so the amplitude keeps
/// the closed form valid.
pub fn build_initial(spec: &InitialSpec, solver: &SolverConfig, seed: Option<u64>) -> CliResult<Spectrum> {
    let grid = solver.grid()?;
    let l = grid.scale();
    let amp = Complex64::new(spec.amplitude, 0.0);
    let u = match &spec.kind {
        InitialKind::Zero => Spectrum::zeros(grid),
        InitialKind::Mode { m, n } => Spectrum::basis(grid, *m, *n)?.scale(amp),
        InitialKind::Gaussian { width, center } => transform(&periodic_gaussian(&grid, *width, center.unwrap_or(torus_center(l)))?).scale(amp),
        InitialKind::Hyperbolic { profile } => {
            let p = scaled_profile(profile, spec.amplitude);
            transform(&sample_on_torus(&Analytic::Hyperbolic(p), 0.0, &grid, Cutoff::None)?.field)
        }
        InitialKind::Ozawa { params, r0, r1 } => {
            let sol = Analytic::Ozawa { params: *params, sigma: solver.sigma };
            transform(&sample_on_torus(&sol, 0.0, &grid, default_cutoff(l, *r0, *r1))?.field).scale(amp)
        }
        InitialKind::Stationary { r0, r1 } => {
            let sol = Analytic::Stationary { sigma: solver.sigma };
            transform(&sample_on_torus(&sol, 0.0, &grid, default_cutoff(l, *r0, *r1))?.field).scale(amp)
        }
        InitialKind::Random { extent } => {
            let seed = seed.ok_or_else(|| CliError::Usage("random initial data need --seed".into()))?;
            let qbox = FreqBox::centered_cube(*extent)?;
            let g = gaussian_on_box(grid, &qbox, &mut rng_for(seed, &[RANDOM_TAG]))?;
            let norm = g.l2_norm();
            g.scale(amp / norm)
        }
    };
    Ok(u)
}

/// `exp(-|x - c|² / (2w²))` summed over the nearest periodic images.
pub fn periodic_gaussian(grid: &TorusGrid, width: f64, center: (f64, f64)) -> CliResult<Field> {
    let p = grid.period();
    let f = Field::from_fn(*grid, |x, y| {
        let mut v = 0.0;
        for i in -1..=1 {
            for j in -1..=1 {
                let dx = x - center.0 + i as f64 * p;
                let dy = y - center.1 + j as f64 * p;
                v += (-(dx * dx + dy * dy) / (2.0 * width * width)).exp();
            }
        }
        Complex64::new(v, 0.0)
    })?;
    Ok(f)
}
