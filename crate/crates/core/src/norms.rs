//! Sobolev and Lebesgue norms on `T²_L`.

use serde::{Deserialize, Serialize};

use crate::field::{Field, Spectrum};

/// Inhomogeneous Sobolev weight `(1 + m²/L² + n²/L²)^s` (squared-norm weight).
pub fn hs_weight(l: f64, m: i64, n: i64, s: f64) -> f64 {
    let (m, n) = (m as f64 / l, n as f64 / l);
    (1.0 + m * m + n * n).powf(s)
}

/// `‖u‖_{H^s} = (Σ (1 + m²/L² + n²/L²)^s |c(m,n)|²)^{1/2}`.
pub fn hs_norm(spec: &Spectrum, s: f64) -> f64 {
    if s == 0.0 {
        return spec.l2_norm();
    }
    let l = spec.grid().scale();
    spec.iter_modes().map(|((m, n), c)| hs_weight(l, m, n, s) * c.norm_sqr()).sum::<f64>().sqrt()
}

/// Homogeneous seminorm `‖(-Δ)^{s/2} u‖_{L²}` with weight `((m² + n²)/L²)^s`, skipping `(0,0)`.
pub fn hs_seminorm(spec: &Spectrum, s: f64) -> f64 {
    let l = spec.grid().scale();
    spec.iter_modes()
        .filter(|((m, n), _)| *m != 0 || *n != 0)
        .map(|((m, n), c)| {
            let k2 = ((m * m + n * n) as f64) / (l * l);
            k2.powf(s) * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lp {
    Two,
    Four,
    Infinity,
}

/// Uniform-weight Riemann quadrature for `p ∈ {2, 4}`, max modulus for `∞`.
pub fn lp_norm(field: &Field, p: Lp) -> f64 {
    let w = field.grid().cell_area();
    let vals = field.values();
    match p {
        Lp::Two => (vals.iter().map(|z| z.norm_sqr()).sum::<f64>() * w).sqrt(),
        Lp::Four => (vals.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * w).powf(0.25),
        Lp::Infinity => vals.iter().map(|z| z.norm()).fold(0.0, f64::max),
    }
}

/// Fraction of `L²` energy in the top frequency octave of the resolved band.
///
/// The band is `max(|m|/kx, |n|/ky) ≤ 1`; the top octave is the part with that
/// ratio above `1/2`. With `dealiased` the band edges are the 2/3-rule cutoffs,
/// otherwise the Nyquist frequencies.
pub fn tail_fraction(spec: &Spectrum, dealiased: bool) -> f64 {
    let g = spec.grid();
    let (kx, ky) = if dealiased {
        (crate::operators::dealias_cutoff(g.nx()), crate::operators::dealias_cutoff(g.ny()))
    } else {
        (g.max_freq_x(), g.max_freq_y())
    };
    let mut total = 0.0;
    let mut tail = 0.0;
    for ((m, n), c) in spec.iter_modes() {
        let e = c.norm_sqr();
        total += e;
        // ratio > 1/2  ⇔  2|m| > kx  or  2|n| > ky
        if 2 * m.abs() > kx || 2 * n.abs() > ky {
            tail += e;
        }
    }
    if total > 0.0 {
        (tail / total).clamp(0.0, 1.0)
    } else {
        0.0
    }
}
