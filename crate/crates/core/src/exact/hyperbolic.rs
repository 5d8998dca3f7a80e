//! `u(t,x,y) = e^{it u₀(θ)²} u₀(θ)` with `θ = (x + y)/L`, an exact solution of the
//! equation with the nonlocal term switched off.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{transform, Field};
use crate::grid::TorusGrid;
use crate::operators::apply_p;

/// Real trigonometric polynomial `u₀(θ) = c₀ + Σ_k (a_k cos kθ + b_k sin kθ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub mean: f64,
    /// `a_k` for `k = 1, 2, …`.
    pub cos: Vec<f64>,
    /// `b_k` for `k = 1, 2, …`.
    pub sin: Vec<f64>,
}

impl ProfileSpec {
    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if !mean.is_finite() || cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("profile coefficients must be finite".into()));
        }
        Ok(Self { mean, cos, sin })
    }

    pub fn constant(kappa: f64) -> Self {
        Self { mean: kappa, cos: Vec::new(), sin: Vec::new() }
    }

    /// `2 + cos θ`.
    pub fn two_plus_cos() -> Self {
        Self { mean: 2.0, cos: vec![1.0], sin: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        let last = |v: &[f64]| v.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
        last(&self.cos).max(last(&self.sin))
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.mean;
        for (k, a) in self.cos.iter().enumerate() {
            v += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, b) in self.sin.iter().enumerate() {
            v += b * ((k + 1) as f64 * theta).sin();
        }
        v
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for (k, a) in self.cos.iter().enumerate() {
            let k = (k + 1) as f64;
            v -= a * k * (k * theta).sin();
        }
        for (k, b) in self.sin.iter().enumerate() {
            let k = (k + 1) as f64;
            v += b * k * (k * theta).cos();
        }
        v
    }

    /// Coefficient bound `|c₀| + Σ |a_k| + |b_k|` on `max |u₀|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.mean.abs() + self.cos.iter().chain(&self.sin).map(|c| c.abs()).sum::<f64>()
    }

    /// `Σ k (|a_k| + |b_k|)`, a bound on `max |u₀'|`.
    fn slope_bound(&self) -> f64 {
        let weighted = |v: &[f64]| v.iter().enumerate().map(|(i, c)| (i + 1) as f64 * c.abs()).sum::<f64>();
        weighted(&self.cos) + weighted(&self.sin)
    }
}

/// `e^{it u₀(x+y)²} u₀(x+y)`.
pub fn hyperbolic_explicit(t: f64, x: f64, y: f64, profile: &ProfileSpec) -> Complex64 {
    hyperbolic_explicit_scaled(t, x, y, profile, 1.0)
}

/// The same family on `T²_L`, with argument `(x + y)/L`.
pub fn hyperbolic_explicit_scaled(t: f64, x: f64, y: f64, profile: &ProfileSpec, l: f64) -> Complex64 {
    let u0 = profile.eval((x + y) / l);
    Complex64::from_polar(u0, t * u0 * u0)
}

/// Samples the family at time `t` on `grid`.
pub fn sample_hyperbolic(t: f64, profile: &ProfileSpec, grid: &TorusGrid) -> Field {
    let l = grid.scale();
    Field::from_fn(*grid, |x, y| hyperbolic_explicit_scaled(t, x, y, profile, l)).expect("finite profile")
}

/// Max modulus of `i ∂_t u + P u + |u|² u` with `P` applied spectrally and `∂_t u` exact.
pub fn hyperbolic_residual(t: f64, profile: &ProfileSpec, grid: &TorusGrid) -> f64 {
    let u = sample_hyperbolic(t, profile, grid);
    let pu = apply_p(&transform(&u)).inverse_transform();
    u.values()
        .iter()
        .zip(pu.values())
        .map(|(z, p)| {
            let i_dt = -z.norm_sqr() * z;
            (i_dt + p + z.norm_sqr() * z).norm()
        })
        .fold(0.0, f64::max)
}

/// `‖u(t)‖_{H^s(T²_L)}` for each `t` from the one-dimensional spectrum of
/// `g_t(θ) = e^{it u₀(θ)²} u₀(θ)`: the torus coefficients are `c(k,k) = 2πL ĝ_k`.
pub fn growth_curve(profile: &ProfileSpec, s: f64, t_list: &[f64]) -> Result<Vec<f64>> {
    growth_curve_scaled(profile, s, t_list, 1.0)
}

pub fn growth_curve_scaled(profile: &ProfileSpec, s: f64, t_list: &[f64], l: f64) -> Result<Vec<f64>> {
    if profile.is_constant() {
        return Err(Error::InvalidParameter("constant profile: no growth statement applies".into()));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s must be nonnegative, got {s}")));
    }
    t_list.iter().map(|&t| diagonal_hs(profile, s, t, l)).collect()
}

fn diagonal_hs(profile: &ProfileSpec, s: f64, t: f64, l: f64) -> Result<f64> {
    let amp = profile.amplitude_bound();
    // local frequency of the phase t·u₀² is at most 2|t|·max|u₀|·max|u₀'|
    let band = 2.0 * t.abs() * amp * profile.slope_bound() + profile.degree() as f64;
    let mut n = ((4.0 * band) as usize + 64).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    loop {
        let fft = planner.plan_fft_forward(n);
        let mut g: Vec<Complex64> = (0..n)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n as f64;
                let u0 = profile.eval(th);
                Complex64::from_polar(u0, t * u0 * u0)
            })
            .collect();
        fft.process(&mut g);
        let scale = 2.0 * PI * l / n as f64;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (j, c) in g.iter().enumerate() {
            let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            let e = (c * scale).norm_sqr();
            let w = (1.0 + 2.0 * k * k / (l * l)).powf(s);
            total += w * e;
            if k.abs() > n as f64 / 4.0 {
                tail += e;
            }
        }
        if tail <= 1e-20 * total || n >= 1 << 22 {
            return Ok(total.sqrt());
        }
        n *= 2;
    }
}
