//! Diagonal Fourier multipliers: the hyperbolic operator `P = -∂²_x + ∂²_y`,
//! the nonlocal operator `E`, the potential solve, and the free propagator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{inverse_transform, transform, Field, Spectrum};
use crate::grid::TorusGrid;

/// Tolerance for the Hermitian-symmetry check in [`solve_phi`], relative to `max |ρ̂|`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Symbol of `P` on `T²_L`: `(m² - n²) / L²`.
pub fn p_symbol(l: f64, m: i64, n: i64) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (m * m - n * n) / (l * l)
}

/// Symbol of `E`: `2m² / (m² + n²)`, zero at the origin. Independent of `L`.
pub fn e_symbol(m: i64, n: i64) -> f64 {
    if m == 0 && n == 0 {
        0.0
    } else {
        let (m, n) = (m as f64, n as f64);
        2.0 * m * m / (m * m + n * n)
    }
}

pub fn apply_p(spec: &Spectrum) -> Spectrum {
    let l = spec.grid().scale();
    spec.map_multiplier(|m, n| Complex64::new(p_symbol(l, m, n), 0.0))
}

pub fn apply_e(spec: &Spectrum) -> Spectrum {
    spec.map_multiplier(|m, n| Complex64::new(e_symbol(m, n), 0.0))
}

/// Solves `Δφ = ∂_x ρ` in the mean-zero gauge: `φ̂ = -i m L / (m² + n²) ρ̂`.
pub fn solve_phi(rho: &Spectrum) -> Result<Spectrum> {
    let scale = rho.max_abs().max(f64::MIN_POSITIVE);
    let defect = rho.hermitian_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { defect: defect / scale, tolerance: HERMITIAN_TOL });
    }
    let l = rho.grid().scale();
    Ok(rho.map_multiplier(|m, n| {
        if m == 0 && n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            let (mf, nf) = (m as f64, n as f64);
            Complex64::new(0.0, -mf * l / (mf * mf + nf * nf))
        }
    }))
}

/// Spectral `∂_x`: multiplies by `i m / L`.
pub fn d_dx(spec: &Spectrum) -> Spectrum {
    let l = spec.grid().scale();
    spec.map_multiplier(|m, _| Complex64::new(0.0, m as f64 / l))
}

pub fn d_dy(spec: &Spectrum) -> Spectrum {
    let l = spec.grid().scale();
    spec.map_multiplier(|_, n| Complex64::new(0.0, n as f64 / l))
}

/// Free flow `e^{itP}`: `c(m,n) ↦ exp(i t (m² - n²)/L²) c(m,n)`.
pub fn propagate_linear(spec: &Spectrum, t: f64) -> Spectrum {
    let l = spec.grid().scale();
    spec.map_multiplier(|m, n| Complex64::from_polar(1.0, t * p_symbol(l, m, n)))
}

/// Largest retained `|m|` along an axis with `n` nodes under the 2/3 rule.
pub fn dealias_cutoff(n: usize) -> i64 {
    (n / 3) as i64
}

/// Whether `(m, n)` survives 2/3-rule truncation on `grid`.
pub fn dealias_keeps(grid: &TorusGrid, m: i64, n: i64) -> bool {
    m.abs() <= dealias_cutoff(grid.nx()) && n.abs() <= dealias_cutoff(grid.ny())
}

/// Zeroes the top third of modes on both axes.
pub fn dealias(spec: &Spectrum) -> Spectrum {
    let g = *spec.grid();
    spec.map_multiplier(|m, n| {
        if dealias_keeps(&g, m, n) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Real potential `|u|² + σ E(|u|²)` at the grid nodes (the `E` term is dropped when `with_e` is false).
pub fn potential(u: &Field, sigma: f64, with_e: bool) -> Vec<f64> {
    let density: Vec<f64> = u.values().iter().map(|z| z.norm_sqr()).collect();
    if !with_e || sigma == 0.0 {
        return density;
    }
    let rho = Field::from_raw(*u.grid(), density.iter().map(|&d| Complex64::new(d, 0.0)).collect());
    let e_rho = inverse_transform(&apply_e(&transform(&rho)));
    density.iter().zip(e_rho.values()).map(|(d, e)| d + sigma * e.re).collect()
}

/// Imaginary residue of `E(|u|²)` after the inverse transform; zero up to rounding.
pub fn e_density_imag_residue(u: &Field) -> f64 {
    let rho = u.modulus_squared();
    let e_rho = inverse_transform(&apply_e(&transform(&rho)));
    e_rho.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Right-hand side `-|u|²u - σ E(|u|²) u` of the evolution, with 2/3-rule dealiasing
/// applied to the input and to the cubic product.
pub fn nonlinear_term(u: &Field, sigma: f64) -> Field {
    let ud = inverse_transform(&dealias(&transform(u)));
    let v = potential(&ud, sigma, true);
    let prod = Field::from_raw(
        *u.grid(),
        ud.values().iter().zip(&v).map(|(z, vv)| -z * *vv).collect(),
    );
    inverse_transform(&dealias(&transform(&prod)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::basis_value;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(l: f64) -> TorusGrid {
        TorusGrid::new(l, 16, 16).unwrap()
    }

    fn random_smooth_spectrum(g: TorusGrid, seed: u64, kmax: i64) -> Spectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Spectrum::zeros(g);
        for m in -kmax..=kmax {
            for n in -kmax..=kmax {
                s.set(m, n, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unwrap();
            }
        }
        s
    }

    #[test]
    fn p_symbol_examples() {
        let e10 = Spectrum::basis(grid(1.0), 1, 0).unwrap();
        assert!((apply_p(&e10).get(1, 0) - 1.0).norm() < 1e-15);
        for l in [1.0, 3.0] {
            let e11 = Spectrum::basis(grid(l), 1, 1).unwrap();
            assert!(apply_p(&e11).l2_norm() < 1e-15);
        }
        let e02 = Spectrum::basis(grid(2.0), 0, 2).unwrap();
        assert!((apply_p(&e02).get(0, 2) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn e_symbol_examples() {
        let g = grid(1.0);
        assert!((apply_e(&Spectrum::basis(g, 1, 0).unwrap()).get(1, 0) - 2.0).norm() < 1e-15);
        assert!(apply_e(&Spectrum::basis(g, 0, 5).unwrap()).l2_norm() < 1e-15);
        assert!(apply_e(&Spectrum::basis(g, 0, 0).unwrap()).l2_norm() < 1e-15);
        assert!((apply_e(&Spectrum::basis(g, 1, 1).unwrap()).get(1, 1) - 1.0).norm() < 1e-15);
        // scale invariance
        let a = apply_e(&Spectrum::basis(grid(1.0), 3, 2).unwrap()).get(3, 2);
        let b = apply_e(&Spectrum::basis(grid(7.0), 3, 2).unwrap()).get(3, 2);
        assert_eq!(a, b);
    }

    #[test]
    fn phi_of_cosine_is_sine() {
        let g = TorusGrid::new(1.0, 16, 16).unwrap();
        let rho = Field::from_fn(g, |x, _| Complex64::new(x.cos(), 0.0)).unwrap();
        let phi = inverse_transform(&solve_phi(&transform(&rho)).unwrap());
        for j in 0..g.nx() {
            for k in 0..g.ny() {
                assert!((phi.at(j, k) - Complex64::new(g.x(j).sin(), 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn phi_of_constant_vanishes() {
        let g = TorusGrid::new(2.0, 8, 8).unwrap();
        let rho = Field::from_fn(g, |_, _| Complex64::new(3.0, 0.0)).unwrap();
        assert!(solve_phi(&transform(&rho)).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn phi_multiplier_identity() {
        let g = TorusGrid::new(1.7, 32, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = Field::new(g, (0..g.len()).map(|_| Complex64::new(rng.random_range(0.0..1.0), 0.0)).collect()).unwrap();
        let rho_hat = transform(&rho);
        let two_dx_phi = d_dx(&solve_phi(&rho_hat).unwrap()).scale(Complex64::new(2.0, 0.0));
        let diff = two_dx_phi.sub(&apply_e(&rho_hat)).unwrap();
        assert!(diff.l2_norm() < 1e-12 * rho_hat.l2_norm());
    }

    #[test]
    fn phi_rejects_complex_density() {
        let g = TorusGrid::new(1.0, 8, 8).unwrap();
        let rho = Spectrum::basis(g, 1, 0).unwrap();
        assert!(matches!(solve_phi(&rho), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn free_flow_phase() {
        let g = grid(1.0);
        let e10 = Spectrum::basis(g, 1, 0).unwrap();
        for t in [0.0, 0.3, -2.0] {
            let out = propagate_linear(&e10, t);
            assert!((out.get(1, 0) - Complex64::from_polar(1.0, t)).norm() < 1e-15);
        }
        let s = random_smooth_spectrum(g, 5, 5);
        assert_eq!(propagate_linear(&s, 0.0), s);
    }

    #[test]
    fn multipliers_commute() {
        let s = random_smooth_spectrum(TorusGrid::new(1.3, 32, 32).unwrap(), 9, 10);
        let a = apply_e(&apply_p(&propagate_linear(&s, 0.7)));
        let b = propagate_linear(&apply_p(&apply_e(&s)), 0.7);
        assert!(a.sub(&b).unwrap().l2_norm() < 1e-13 * a.l2_norm());
    }

    #[test]
    fn e_never_amplifies_beyond_two() {
        let s = random_smooth_spectrum(TorusGrid::new(1.0, 32, 32).unwrap(), 2, 15);
        assert!(apply_e(&s).l2_norm() <= 2.0 * s.l2_norm());
        let g = grid(1.0);
        let mut best = 0.0_f64;
        for m in -8..8 {
            for n in -8..8 {
                best = best.max(e_symbol(m, n));
            }
        }
        assert_eq!(best, 2.0);
        assert_eq!(apply_e(&Spectrum::basis(g, 5, 0).unwrap()).l2_norm(), 2.0);
    }

    #[test]
    fn nonlinear_term_on_constant() {
        let g = grid(1.0);
        let c = Complex64::new(0.4, -0.3);
        let u = Field::from_fn(g, |_, _| c).unwrap();
        let out = nonlinear_term(&u, 1.0);
        let expect = -c * c.norm_sqr();
        assert!(out.values().iter().all(|z| (z - expect).norm() < 1e-14));
    }

    #[test]
    fn nonlinear_term_on_plane_wave() {
        let g = grid(1.0);
        let u = Field::from_fn(g, |x, y| basis_value(1.0, 1, 0, x, y)).unwrap();
        let out = nonlinear_term(&u, 1.0);
        let k = 1.0 / (4.0 * PI * PI);
        for (a, b) in out.values().iter().zip(u.values()) {
            assert!((a + b * k).norm() < 1e-15);
        }
    }

    #[test]
    fn e_of_density_is_real() {
        let g = TorusGrid::new(1.0, 32, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = Field::new(g, (0..g.len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).unwrap();
        assert!(e_density_imag_residue(&u) < 1e-12);
    }
}
