use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{inverse_transform, transform, Field};
use crate::grid::TorusGrid;
use crate::operators::{apply_e, apply_p};

use super::hyperbolic::{hyperbolic_explicit_scaled, ProfileSpec};
use super::ozawa::{ozawa_dt, ozawa_v, stationary_profile, OzawaParams};

fn smooth_zero(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Radial exp-bump: 1 for `r ≤ r0`, 0 for `r ≥ r1`, `C^∞` in between.
pub fn bump(r: f64, r0: f64, r1: f64) -> f64 {
    if r <= r0 {
        return 1.0;
    }
    if r >= r1 {
        return 0.0;
    }
    let tau = (r1 - r) / (r1 - r0);
    let (a, b) = (smooth_zero(tau), smooth_zero(1.0 - tau));
    a / (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Cutoff {
    None,
    Bump { r0: f64, r1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Analytic {
    /// Solves the equation with `E` switched off.
    Hyperbolic(ProfileSpec),
    /// ℝ² solution centred in the torus; `sigma` is the sign of the nonlocal term used for the residual.
    Ozawa { params: OzawaParams, sigma: f64 },
    /// `1 / (1 + |x|²)` centred in the torus.
    Stationary { sigma: f64 },
}

/// PDE residual of a sampled field, split by region relative to the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    /// `L²` norm of the residual on `r ≤ r0` (the whole torus without cutoff).
    pub l2_inside: f64,
    /// `L²` norm on the transition annulus `r0 < r < r1`.
    pub l2_annulus: f64,
    pub l2_outside: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub field: Field,
    pub residual: ResidualReport,
    /// False for cut-off ℝ² data: the field is a truncation, not an exact torus solution.
    pub exact: bool,
}

/// Samples `solution` at time `t` on `grid`. ℝ² solutions are centred at `(πL, πL)`
/// and require a bump cutoff with `r1` at most the inscribed radius `πL`.
pub fn sample_on_torus(solution: &Analytic, t: f64, grid: &TorusGrid, cutoff: Cutoff) -> Result<Sampled> {
    let l = grid.scale();
    let centre = PI * l;
    if let Cutoff::Bump { r0, r1 } = cutoff {
        if !(r0 >= 0.0 && r1 > r0) {
            return Err(Error::InvalidParameter(format!("degenerate bump: need 0 ≤ r0 < r1, got r0 = {r0}, r1 = {r1}")));
        }
        if r1 > centre {
            return Err(Error::InvalidParameter(format!("bump radius {r1} exceeds the inscribed torus radius {centre}")));
        }
    }
    let chi = |x: f64, y: f64| match cutoff {
        Cutoff::None => 1.0,
        Cutoff::Bump { r0, r1 } => bump(((x - centre).powi(2) + (y - centre).powi(2)).sqrt(), r0, r1),
    };

    let (values, i_dt, with_e, sigma): (Vec<Complex64>, Vec<Complex64>, bool, f64) = match solution {
        Analytic::Hyperbolic(profile) => {
            let mut u = Vec::with_capacity(grid.len());
            let mut d = Vec::with_capacity(grid.len());
            for j in 0..grid.nx() {
                for k in 0..grid.ny() {
                    let (x, y) = (grid.x(j), grid.y(k));
                    let z = hyperbolic_explicit_scaled(t, x, y, profile, l) * chi(x, y);
                    let u0 = profile.eval((x + y) / l);
                    u.push(z);
                    d.push(-u0 * u0 * z);
                }
            }
            (u, d, false, 0.0)
        }
        Analytic::Ozawa { params, sigma } => {
            if matches!(cutoff, Cutoff::None) {
                return Err(Error::InvalidParameter("the ℝ² family needs a cutoff to live on the torus".into()));
            }
            let mut u = Vec::with_capacity(grid.len());
            let mut d = Vec::with_capacity(grid.len());
            for j in 0..grid.nx() {
                for k in 0..grid.ny() {
                    let (x, y) = (grid.x(j), grid.y(k));
                    let c = chi(x, y);
                    u.push(ozawa_v(t, x - centre, y - centre, params)? * c);
                    d.push(Complex64::i() * ozawa_dt(t, x - centre, y - centre, params)? * c);
                }
            }
            (u, d, true, *sigma)
        }
        Analytic::Stationary { sigma } => {
            if matches!(cutoff, Cutoff::None) {
                return Err(Error::InvalidParameter("the ℝ² profile needs a cutoff to live on the torus".into()));
            }
            let u = Field::from_fn(*grid, |x, y| Complex64::new(stationary_profile(x - centre, y - centre) * chi(x, y), 0.0))?;
            (u.into_values(), vec![Complex64::new(0.0, 0.0); grid.len()], true, *sigma)
        }
    };
    let field = Field::new(*grid, values)?;

    let spec = transform(&field);
    let pu = inverse_transform(&apply_p(&spec));
    let e_term = if with_e {
        let rho = field.modulus_squared();
        Some(inverse_transform(&apply_e(&transform(&rho))))
    } else {
        None
    };
    let w = grid.cell_area();
    let mut rep = ResidualReport { max_abs: 0.0, l2_inside: 0.0, l2_annulus: 0.0, l2_outside: 0.0 };
    for j in 0..grid.nx() {
        for k in 0..grid.ny() {
            let idx = j * grid.ny() + k;
            let z = field.values()[idx];
            let mut r = i_dt[idx] + pu.values()[idx] + z.norm_sqr() * z;
            if let Some(e) = &e_term {
                r += sigma * e.values()[idx].re * z;
            }
            let a = r.norm();
            rep.max_abs = rep.max_abs.max(a);
            let region = match cutoff {
                Cutoff::None => 0,
                Cutoff::Bump { r0, r1 } => {
                    let rad = ((grid.x(j) - centre).powi(2) + (grid.y(k) - centre).powi(2)).sqrt();
                    if rad <= r0 {
                        0
                    } else if rad < r1 {
                        1
                    } else {
                        2
                    }
                }
            };
            let slot = match region {
                0 => &mut rep.l2_inside,
                1 => &mut rep.l2_annulus,
                _ => &mut rep.l2_outside,
            };
            *slot += a * a * w;
        }
    }
    rep.l2_inside = rep.l2_inside.sqrt();
    rep.l2_annulus = rep.l2_annulus.sqrt();
    rep.l2_outside = rep.l2_outside.sqrt();
    let exact = matches!(solution, Analytic::Hyperbolic(_)) && matches!(cutoff, Cutoff::None);
    Ok(Sampled { field, residual: rep, exact })
}
