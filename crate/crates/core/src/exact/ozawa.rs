//! The explicit blow-up family on ℝ²
//!
//! ```text
//! v(t,x,y) = ℓ⁻¹ exp(i b (-x² + y²) / (4ℓ)) / (1 + (x/ℓ)² + (y/ℓ)²),   ℓ = a + b t,
//! ```
//!
//! which blows up at `T = -a/b`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{transform, Field};
use crate::grid::TorusGrid;
use crate::norms::{hs_norm, tail_fraction};
use crate::quadrature::gauss_legendre;

use super::sampling::bump;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OzawaParams {
    pub a: f64,
    pub b: f64,
    /// Radius of the disk used for physical-space quadrature.
    pub radius: f64,
}

impl Default for OzawaParams {
    fn default() -> Self {
        Self { a: 1.0, b: -1.0, radius: 100.0 }
    }
}

impl OzawaParams {
    pub fn new(a: f64, b: f64, radius: f64) -> Result<Self> {
        let p = Self { a, b, radius };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.a > 0.0) {
            bad.push(format!("a must be positive, got {}", self.a));
        }
        if !(self.b < 0.0) {
            bad.push(format!("b must be negative, got {}", self.b));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            bad.push(format!("quadrature radius must be positive, got {}", self.radius));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(bad.join("; ")))
        }
    }

    pub fn blowup_time(&self) -> f64 {
        -self.a / self.b
    }

    /// Current width `ℓ = a + b t`; rejects `t ≥ T`.
    pub fn width(&self, t: f64) -> Result<f64> {
        let ell = self.a + self.b * t;
        if !(ell > 0.0) || t >= self.blowup_time() {
            return Err(Error::PastBlowup { t, blowup: self.blowup_time() });
        }
        Ok(ell)
    }
}

/// `1 / (1 + x² + y²)`.
pub fn stationary_profile(x: f64, y: f64) -> f64 {
    1.0 / (1.0 + x * x + y * y)
}

fn v_unchecked(ell: f64, b: f64, x: f64, y: f64) -> Complex64 {
    let phase = b * (-x * x + y * y) / (4.0 * ell);
    Complex64::from_polar(stationary_profile(x / ell, y / ell) / ell, phase)
}

pub fn ozawa_v(t: f64, x: f64, y: f64, params: &OzawaParams) -> Result<Complex64> {
    let ell = params.width(t)?;
    Ok(v_unchecked(ell, params.b, x, y))
}

/// `∂_t v` from the closed form.
pub fn ozawa_dt(t: f64, x: f64, y: f64, params: &OzawaParams) -> Result<Complex64> {
    let ell = params.width(t)?;
    let b = params.b;
    let r2 = x * x + y * y;
    let q = -x * x + y * y;
    let log_rate = Complex64::new(
        -b / ell + 2.0 * b * r2 / (ell * ell * ell * (1.0 + r2 / (ell * ell))),
        -b * b * q / (4.0 * ell * ell),
    );
    Ok(v_unchecked(ell, b, x, y) * log_rate)
}

/// Quadrature over the disk `|x| ≤ R` of `f(r, θ)` with the radial map `r = ℓ tan φ`,
/// Gauss–Legendre in `φ` and the trapezoid rule in `θ`.
fn disk_quadrature(ell: f64, radius: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let phi_max = (radius / ell).atan();
    let (nodes, weights) = gauss_legendre(96, 0.0, phi_max);
    let n_theta = 64;
    let mut total = 0.0;
    for (phi, w) in nodes.iter().zip(&weights) {
        let r = ell * phi.tan();
        let dr = ell / phi.cos().powi(2);
        let mut ring = 0.0;
        for k in 0..n_theta {
            ring += f(r, 2.0 * PI * k as f64 / n_theta as f64);
        }
        total += w * dr * r * ring * (2.0 * PI / n_theta as f64);
    }
    total
}

/// Norms of `v(t)` with quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OzawaNorms {
    pub t: f64,
    pub s: f64,
    /// `‖v‖_{L²(ℝ²)}`: disk quadrature plus the closed-form tail beyond `R`.
    pub l2: f64,
    /// `‖v‖_{L²(|x| ≤ R)}` from quadrature alone.
    pub l2_disk: f64,
    /// `‖v‖²_{L²(|x| > R)}`, the part not seen by the disk quadrature.
    pub l2_truncation: f64,
    /// `‖v‖_{H^s(ℝ²)}` with weight `(1 + |ξ|²)^s`.
    pub hs: f64,
    /// Homogeneous `‖v‖_{Ḣ^s}`.
    pub hs_homogeneous: f64,
    /// Quadrature error estimate of `hs` (difference against the half-density rule).
    pub hs_error: f64,
    /// `‖v‖_{L⁴(ℝ²)}`: disk quadrature plus tail.
    pub l4: f64,
    pub l4_truncation: f64,
}

pub fn ozawa_norms(t: f64, s: f64, params: &OzawaParams) -> Result<OzawaNorms> {
    params.validate()?;
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "s = {s} is out of range: v(t) is in H^s for s < 1 only (it is not in H^1)"
        )));
    }
    let ell = params.width(t)?;
    let radius = params.radius;
    let rho = radius / ell;

    let mass_disk = disk_quadrature(ell, radius, |r, th| {
        v_unchecked(ell, params.b, r * th.cos(), r * th.sin()).norm_sqr()
    });
    let mass_tail = PI / (1.0 + rho * rho);
    let l4_disk = disk_quadrature(ell, radius, |r, th| {
        v_unchecked(ell, params.b, r * th.cos(), r * th.sin()).norm_sqr().powi(2)
    });
    let l4_tail = PI / (3.0 * ell * ell) / (1.0 + rho * rho).powi(3);

    let beta = params.b * ell / 4.0;
    let (hs, hs_homogeneous, hs_error) = if s == 0.0 {
        let m = (mass_disk + mass_tail).sqrt();
        (m, m, 0.0)
    } else {
        let sub = subordinated(ell, s, beta);
        let err = (sub.inhomogeneous.sqrt() - sub.inhomogeneous_coarse.sqrt()).abs();
        (sub.inhomogeneous.sqrt(), sub.homogeneous.sqrt(), err)
    };
    Ok(OzawaNorms {
        t,
        s,
        l2: (mass_disk + mass_tail).sqrt(),
        l2_disk: mass_disk.sqrt(),
        l2_truncation: mass_tail,
        hs,
        hs_homogeneous,
        hs_error,
        l4: (l4_disk + l4_tail).powf(0.25),
        l4_truncation: l4_tail,
    })
}

/// `‖v(t)‖⁴_{L⁴} = π / (3ℓ²)`.
pub fn ozawa_l4_pow4(t: f64, params: &OzawaParams) -> Result<f64> {
    let ell = params.width(t)?;
    Ok(PI / (3.0 * ell * ell))
}

struct Subordinated {
    inhomogeneous: f64,
    homogeneous: f64,
    inhomogeneous_coarse: f64,
}

struct Pair {
    pref: f64,
    re: f64,
    im: f64,
    a0: f64,
    coarse: bool,
}

/// Node pairs `(σ, σ')` of the double Laplace integral, symmetric pairs merged.
/// `H(κ) = Σ pref / |A0 + κ|` with `A0 = 1/(4(σ+iβ)) + 1/(4(σ'-iβ))`.
fn laplace_pairs(s: f64, beta: f64) -> Vec<Pair> {
    let h = 0.5;
    let lo = (-40.0 / (1.0 - s)).max(-600.0);
    let count = ((4.0 - lo) / h).floor() as usize + 1;
    let sigma: Vec<f64> = (0..count).map(|i| (lo + h * i as f64).exp()).collect();
    let mut pairs = Vec::with_capacity(count * (count + 1) / 2);
    for i in 0..count {
        for j in i..count {
            let (s1, s2) = (sigma[i], sigma[j]);
            let mult = if i == j { 1.0 } else { 2.0 };
            let pref = mult * PI / 4.0 * (-s1 - s2).exp()
                / ((s1 * s1 + beta * beta).sqrt() * (s2 * s2 + beta * beta).sqrt())
                * s1
                * s2
                * h
                * h;
            let z = Complex64::new(1.0, 0.0) / (4.0 * Complex64::new(s1, beta))
                + Complex64::new(1.0, 0.0) / (4.0 * Complex64::new(s2, -beta));
            pairs.push(Pair { pref, re: z.re, im: z.im, a0: z.re.hypot(z.im), coarse: i % 2 == 0 && j % 2 == 0 });
        }
    }
    pairs
}

/// Squared Sobolev norms of the profile `w(ξ) = e^{iβ(-ξ₁²+ξ₂²)} / (1 + |ξ|²)` at width `ℓ`.
///
/// With `H(κ) = ∫ e^{-κ|η|²} |ŵ(η)|² dη`, the subordination identity
/// `(1+q)^s = s/Γ(1-s) ∫ μ^{-1-s} (1 - e^{-μ(1+q)}) dμ` gives
/// `‖v‖²_{H^s} = s/Γ(1-s) ∫ μ^{-1-s} [π - H(μ/ℓ²) + (1 - e^{-μ}) H(μ/ℓ²)] dμ`.
/// `H` is a double integral over the Laplace variables of `(1 + |ξ|²)^{-1}`; all three
/// integrals use the trapezoid rule in logarithmic variables.
fn subordinated(ell: f64, s: f64, beta: f64) -> Subordinated {
    let pairs = laplace_pairs(s, beta);
    let gamma = gamma_1m(s);
    let hm = 0.5;
    let mu_lo = -30.0 / (1.0 - s);
    let mu_hi = 40.0 / s;
    let n_mu = ((mu_hi - mu_lo) / hm).floor() as usize + 1;
    let (mut inh, mut hom, mut coarse) = (0.0, 0.0, 0.0);
    for k in 0..n_mu {
        let mu = (mu_lo + hm * k as f64).exp();
        let kappa = mu / (ell * ell);
        let (mut hd, mut hk, mut hd_c, mut hk_c) = (0.0, 0.0, 0.0, 0.0);
        for p in &pairs {
            let ak = (p.re + kappa).hypot(p.im);
            // π - H(κ) without cancellation: 1/|A0| - 1/|A0+κ|
            let diff = (kappa / p.a0) * ((2.0 * p.re + kappa) / (ak + p.a0)) / ak;
            let d = p.pref * diff;
            let full = p.pref / ak;
            hd += d;
            hk += full;
            if p.coarse {
                hd_c += d;
                hk_c += full;
            }
        }
        let w = mu.powf(-s) * hm;
        let em = -(-mu).exp_m1();
        hom += w * hd;
        inh += w * (hd + em * hk);
        if k % 2 == 0 {
            coarse += 2.0 * w * 4.0 * (hd_c + em * hk_c);
        }
    }
    let c = s / gamma;
    Subordinated { inhomogeneous: c * inh, homogeneous: c * hom, inhomogeneous_coarse: c * coarse }
}

/// `Γ(1 - s)` for `s ∈ (0, 1)` via the Lanczos approximation.
fn gamma_1m(s: f64) -> f64 {
    lanczos_gamma(1.0 - s)
}

fn lanczos_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `‖χ v(t)‖_{H^s}` for a smooth cutoff `χ` equal to 1 on `ε ≤ |x| ≤ A`, vanishing for
/// `|x| ≤ ε/2` and `|x| ≥ 5A/4`, computed by sampling `χ v` on a periodic box and
/// summing its Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusNorm {
    pub value: f64,
    pub nodes: usize,
    /// Energy fraction in the top octave of the box spectrum.
    pub tail: f64,
}

pub fn annulus_hs(t: f64, s: f64, eps: f64, outer: f64, params: &OzawaParams, nodes: Option<usize>) -> Result<AnnulusNorm> {
    params.validate()?;
    if !(eps > 0.0 && outer > eps) {
        return Err(Error::InvalidParameter(format!("annulus needs 0 < ε < A, got ε = {eps}, A = {outer}")));
    }
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("s = {s} must lie in [0, 1)")));
    }
    let ell = params.width(t)?;
    let half = 1.5 * outer;
    // the chirp has local frequency |b| r / (2ℓ); resolve it at the outer edge
    let kmax = params.b.abs() * 1.25 * outer / (2.0 * ell) + 4.0 / eps + 8.0 / outer;
    let n = nodes.unwrap_or_else(|| ((8.0 * kmax * half / PI) as usize + 64).next_power_of_two());
    let grid = TorusGrid::new(half / PI, n, n)?;
    let field = Field::from_fn(grid, |x, y| {
        let (x, y) = (x - half, y - half);
        let r = (x * x + y * y).sqrt();
        let chi = (1.0 - bump(r, eps / 2.0, eps)) * bump(r, outer, 1.25 * outer);
        if chi == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            v_unchecked(ell, params.b, x, y) * chi
        }
    })?;
    let spec = transform(&field);
    Ok(AnnulusNorm { value: hs_norm(&spec, s), nodes: n, tail: tail_fraction(&spec, false) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_values() {
        let p = OzawaParams::default();
        assert_relative_eq!(ozawa_v(0.0, 0.0, 0.0, &p).unwrap().re, 1.0);
        for t in [0.0, 0.3, 0.9] {
            assert_relative_eq!(ozawa_v(t, 0.0, 0.0, &p).unwrap().norm(), 1.0 / (1.0 - t), max_relative = 1e-15);
        }
        assert_eq!(OzawaParams::new(2.0, -0.5, 10.0).unwrap().blowup_time(), 4.0);
        assert!(matches!(ozawa_v(1.0, 0.0, 0.0, &p), Err(Error::PastBlowup { .. })));
        assert!(OzawaParams::new(-1.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn time_derivative_matches_difference() {
        let p = OzawaParams::default();
        let h = 1e-6;
        for (x, y) in [(0.3, -0.2), (1.5, 0.7), (-2.0, 3.0)] {
            let fd = (ozawa_v(0.4 + h, x, y, &p).unwrap() - ozawa_v(0.4 - h, x, y, &p).unwrap()) / (2.0 * h);
            let an = ozawa_dt(0.4, x, y, &p).unwrap();
            assert!((fd - an).norm() < 1e-7 * an.norm().max(1.0));
        }
    }

    #[test]
    fn stationary_profile_mass_and_symmetry() {
        assert_eq!(stationary_profile(0.0, 0.0), 1.0);
        let m = disk_quadrature(1.0, 100.0, |r, th| stationary_profile(r * th.cos(), r * th.sin()).powi(2));
        assert!((m - PI).abs() < 1e-3);
        for th in [0.1, 1.0, 2.5] {
            let (x, y) = (0.7 * f64::cos(th), 0.7 * f64::sin(th));
            assert_relative_eq!(stationary_profile(x, y), stationary_profile(0.7, 0.0), max_relative = 1e-15);
        }
    }

    #[test]
    fn mass_is_root_pi_and_constant() {
        let p = OzawaParams::default();
        let masses: Vec<f64> = [0.0, 0.5, 0.9, 0.99].iter().map(|&t| ozawa_norms(t, 0.0, &p).unwrap().l2).collect();
        for m in &masses {
            assert!((m - PI.sqrt()).abs() < 1e-10, "{m}");
        }
        let raw = ozawa_norms(0.5, 0.0, &p).unwrap();
        assert!((raw.l2_disk.powi(2) + raw.l2_truncation - PI).abs() < 1e-12);
    }

    #[test]
    fn l4_closed_form() {
        let p = OzawaParams::default();
        for t in [0.0, 0.7] {
            let n = ozawa_norms(t, 0.0, &p).unwrap();
            assert_relative_eq!(n.l4.powi(4), ozawa_l4_pow4(t, &p).unwrap(), max_relative = 1e-10);
        }
    }

    #[test]
    fn laplace_mass_is_pi() {
        // H(0) = ‖w‖² = π for any chirp
        for beta in [0.0, -0.25, -1.0] {
            let h0: f64 = laplace_pairs(0.8, beta).iter().map(|p| p.pref / p.a0).sum();
            assert!((h0 - PI).abs() < 1e-7, "{h0}");
        }
    }

    #[test]
    fn hs_reference_value() {
        // independent polar-quadrature value for ℓ = 1, β = -1/4, s = 0.8
        let p = OzawaParams::new(1.0, -1.0, 100.0).unwrap();
        let n = ozawa_norms(0.0, 0.8, &p).unwrap();
        assert!((n.hs.powi(2) - 8.4685).abs() < 2e-3, "{}", n.hs.powi(2));
        assert!(n.hs_error < 1e-4);
        assert!(n.hs_homogeneous < n.hs);
    }

    #[test]
    fn unchirped_scaling() {
        // with b → 0 the homogeneous seminorm scales exactly as ℓ^{-s}
        let s = 0.6;
        let a = subordinated(1.0, s, 0.0).homogeneous;
        let b = subordinated(0.5, s, 0.0).homogeneous;
        assert_relative_eq!((b / a).sqrt(), 0.5f64.powf(-s), max_relative = 1e-6);
    }

    #[test]
    fn rejects_h1() {
        assert!(ozawa_norms(0.0, 1.0, &OzawaParams::default()).is_err());
    }

    #[test]
    fn annulus_norm_decreases_toward_blowup() {
        let p = OzawaParams::default();
        let a = annulus_hs(0.8, 0.6, 1.0, 2.0, &p, None).unwrap();
        let b = annulus_hs(0.9, 0.6, 1.0, 2.0, &p, None).unwrap();
        assert!(b.value < a.value, "{a:?} {b:?}");
        assert!(a.tail < 1e-6, "{a:?}");
    }
}
