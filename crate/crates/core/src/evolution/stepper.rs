use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::{inverse_transform, transform, Field, Spectrum};
use crate::grid::TorusGrid;
use crate::operators::{dealias_keeps, e_symbol, p_symbol, potential};

use super::config::SolverConfig;

/// Exact flow of `i ∂_t u = -V u` with `V = |u|² + σ E(|u|²)` over `dt`.
pub fn nonlinear_substep(u: &Field, dt: f64, sigma: f64, e_enabled: bool) -> Field {
    let v = potential(u, sigma, e_enabled);
    let values = u
        .values()
        .iter()
        .zip(&v)
        .map(|(z, vv)| z * Complex64::from_polar(1.0, dt * vv))
        .collect();
    Field::new(*u.grid(), values).expect("phase rotation keeps shape")
}

/// One Strang step: half free flow, full nonlinear substep, half free flow.
pub fn strang_step(u: &Field, dt: f64, config: &SolverConfig) -> Result<Field> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::InvalidParameter(format!("step must be finite and nonzero, got {dt}")));
    }
    let mut stepper = Stepper::new(*u.grid(), config);
    let mut spec = transform(u);
    stepper.step(spec.coeffs_mut(), dt)?;
    Ok(inverse_transform(&spec))
}

/// Diagnostics available for free at the midpoint of a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidStep {
    pub linf: f64,
    /// `‖u‖⁴_{L⁴}` at the midpoint.
    pub l4_pow4: f64,
}

/// Reusable Strang stepper acting on coefficient arrays.
pub struct Stepper {
    grid: TorusGrid,
    fft: Arc<Fft2>,
    sigma: f64,
    e_enabled: bool,
    p: Vec<f64>,
    e: Vec<f64>,
    keep: Option<Vec<bool>>,
    half: Vec<Complex64>,
    half_dt: f64,
    buf: Vec<Complex64>,
    rho: Vec<Complex64>,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper").field("grid", &self.grid).finish()
    }
}

impl Stepper {
    pub fn new(grid: TorusGrid, config: &SolverConfig) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let l = grid.scale();
        let mut p = Vec::with_capacity(grid.len());
        let mut e = Vec::with_capacity(grid.len());
        let mut keep = Vec::with_capacity(grid.len());
        for i in 0..nx {
            let m = grid.freq_x(i);
            for k in 0..ny {
                let n = grid.freq_y(k);
                p.push(p_symbol(l, m, n));
                e.push(e_symbol(m, n));
                keep.push(dealias_keeps(&grid, m, n));
            }
        }
        Self {
            grid,
            fft: Fft2::cached(nx, ny),
            sigma: config.sigma,
            e_enabled: config.e_enabled && config.sigma != 0.0,
            p,
            e,
            keep: config.dealias.then_some(keep),
            half: vec![Complex64::new(1.0, 0.0); grid.len()],
            half_dt: 0.0,
            buf: vec![Complex64::new(0.0, 0.0); grid.len()],
            rho: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Zeroes modes outside the retained band (no-op without dealiasing).
    pub fn truncate(&self, coeffs: &mut [Complex64]) {
        if let Some(keep) = &self.keep {
            for (c, &k) in coeffs.iter_mut().zip(keep) {
                if !k {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    fn apply_half(&mut self, coeffs: &mut [Complex64], dt: f64) {
        let h = dt / 2.0;
        if h != self.half_dt {
            for (w, &p) in self.half.iter_mut().zip(&self.p) {
                *w = Complex64::from_polar(1.0, h * p);
            }
            self.half_dt = h;
        }
        for (c, w) in coeffs.iter_mut().zip(&self.half) {
            *c *= w;
        }
    }

    /// Advances `coeffs` by `dt` in place.
    pub fn step(&mut self, coeffs: &mut [Complex64], dt: f64) -> Result<MidStep> {
        let two_pi_l = 2.0 * PI * self.grid.scale();
        let len = self.grid.len() as f64;
        self.apply_half(coeffs, dt);

        for (b, c) in self.buf.iter_mut().zip(coeffs.iter()) {
            *b = c / two_pi_l;
        }
        self.fft.inverse(&mut self.buf);

        let mut linf2: f64 = 0.0;
        let mut l4 = 0.0;
        for (r, z) in self.rho.iter_mut().zip(&self.buf) {
            let d = z.norm_sqr();
            linf2 = linf2.max(d);
            l4 += d * d;
            *r = Complex64::new(d, 0.0);
        }
        if self.e_enabled {
            self.fft.forward(&mut self.rho);
            for (r, &e) in self.rho.iter_mut().zip(&self.e) {
                *r *= e / len;
            }
            self.fft.inverse(&mut self.rho);
            for (z, r) in self.buf.iter_mut().zip(&self.rho) {
                let v = z.norm_sqr() + self.sigma * r.re;
                *z *= Complex64::from_polar(1.0, dt * v);
            }
        } else {
            for (z, r) in self.buf.iter_mut().zip(&self.rho) {
                *z *= Complex64::from_polar(1.0, dt * r.re);
            }
        }

        self.fft.forward(&mut self.buf);
        let back = two_pi_l / len;
        for (c, b) in coeffs.iter_mut().zip(&self.buf) {
            *c = b * back;
        }
        self.truncate(coeffs);
        self.apply_half(coeffs, dt);

        if !linf2.is_finite() || coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NumericBreakdown(f64::NAN));
        }
        Ok(MidStep { linf: linf2.sqrt(), l4_pow4: l4 * self.grid.cell_area() })
    }

    /// `‖u‖_{L∞}` of the state held in `coeffs`.
    pub fn linf(&mut self, coeffs: &[Complex64]) -> f64 {
        let two_pi_l = 2.0 * PI * self.grid.scale();
        for (b, c) in self.buf.iter_mut().zip(coeffs) {
            *b = c / two_pi_l;
        }
        self.fft.inverse(&mut self.buf);
        self.buf.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
    }

    /// Advances a spectrum by `dt`, leaving the input untouched.
    pub fn advance(&mut self, spec: &Spectrum, dt: f64) -> Result<Spectrum> {
        let mut out = spec.clone();
        self.step(out.coeffs_mut(), dt)?;
        Ok(out)
    }
}
