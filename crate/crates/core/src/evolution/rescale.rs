use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Spectrum;
use crate::norms::hs_norm;

/// `v(x, y) = λ u(λ x, λ y)` on the torus of scale `L / λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledState {
    pub source_time: f64,
    pub s: f64,
    pub lambda: f64,
    pub state: Spectrum,
}

pub const LAMBDA_RANGE: (f64, f64) = (1e-6, 1e6);

/// Rescales with an explicit `λ`. The orthonormal basis absorbs the amplitude factor,
/// so the coefficients carry over unchanged onto the grid of scale `L / λ`.
pub fn rescale_by(u: &Spectrum, lambda: f64) -> Result<Spectrum> {
    if !(lambda >= LAMBDA_RANGE.0 && lambda <= LAMBDA_RANGE.1) {
        return Err(Error::InvalidParameter(format!(
            "scaling factor {lambda:e} outside [{:e}, {:e}]",
            LAMBDA_RANGE.0, LAMBDA_RANGE.1
        )));
    }
    let grid = u.grid().with_scale(u.grid().scale() / lambda)?;
    Spectrum::new(grid, u.coeffs().to_vec())
}

/// Rescales with `λ = ‖u‖_{H^s}^{-1/s}`, which puts the homogeneous `Ḣ^s` seminorm at most 1.
pub fn rescale_solution(u: &Spectrum, tau: f64, s: f64) -> Result<ScaledState> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("rescaling needs s > 0, got {s}")));
    }
    let norm = hs_norm(u, s);
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("cannot rescale the zero state".into()));
    }
    let lambda = norm.powf(-1.0 / s);
    Ok(ScaledState { source_time: tau, s, lambda, state: rescale_by(u, lambda)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{SolverConfig, Stepper};
    use crate::grid::TorusGrid;
    use crate::norms::hs_seminorm;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(g: TorusGrid, amp: f64) -> Spectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut s = Spectrum::zeros(g);
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                let w = amp * (-((m * m + n * n) as f64) / 3.0).exp();
                s.set(m, n, Complex64::new(rng.random_range(-1.0..1.0) * w, rng.random_range(-1.0..1.0) * w)).unwrap();
            }
        }
        s
    }

    #[test]
    fn mass_and_seminorm() {
        let g = TorusGrid::new(1.0, 32, 32).unwrap();
        for amp in [0.1, 1.0, 10.0] {
            let u = data(g, amp);
            for s in [0.6, 0.8] {
                let v = rescale_solution(&u, 0.0, s).unwrap();
                assert!((v.state.l2_norm() - u.l2_norm()).abs() <= 1e-10 * u.l2_norm());
                assert!(hs_seminorm(&v.state, s) <= 1.0 + 1e-8);
                let expect = v.lambda.powf(s) * hs_seminorm(&u, s);
                assert!((hs_seminorm(&v.state, s) - expect).abs() < 1e-12 * expect);
            }
        }
    }

    #[test]
    fn lambda_bounds() {
        let g = TorusGrid::new(1.0, 16, 16).unwrap();
        assert!(rescale_by(&data(g, 1.0), 1e7).is_err());
        assert!(rescale_by(&data(g, 1.0), 1e-7).is_err());
        assert!(rescale_solution(&Spectrum::zeros(g), 0.0, 0.7).is_err());
    }

    #[test]
    fn evolution_commutes_with_scaling() {
        let g = TorusGrid::new(1.0, 32, 32).unwrap();
        let u = data(g, 1.0);
        let cfg = SolverConfig::new(1.0, 32, 32);
        for lambda in [0.5, 2.0] {
            let t = 0.01;
            let steps = 10;
            let mut su = Stepper::new(g, &cfg);
            let mut uu = u.clone();
            for _ in 0..steps {
                su.step(uu.coeffs_mut(), lambda * lambda * t / steps as f64).unwrap();
            }
            let a = rescale_by(&uu, lambda).unwrap();

            let mut vv = rescale_by(&u, lambda).unwrap();
            let mut sv = Stepper::new(*vv.grid(), &cfg);
            for _ in 0..steps {
                sv.step(vv.coeffs_mut(), t / steps as f64).unwrap();
            }
            assert!(a.sub(&vv).unwrap().l2_norm() < 1e-8);
        }
    }
}
