use std::f64::consts::PI;

use dstorus::exact::{growth_curve, growth_curve_scaled, hyperbolic_residual, ozawa_norms, sample_hyperbolic, OzawaParams, ProfileSpec};
use dstorus::evolution::{fit_power_law, fit_rate_for};
use dstorus::{hs_norm, transform, TorusGrid};

#[test]
fn hyperbolic_residual_vanishes_on_the_grid() {
    let grid = TorusGrid::new(2.0, 64, 64).unwrap();
    for t in [0.0, 0.3, 1.0] {
        assert!(hyperbolic_residual(t, &ProfileSpec::two_plus_cos(), &grid) < 1e-10);
    }
}

#[test]
fn growth_curve_matches_sampled_norm_and_grows_linearly() {
    let p = ProfileSpec::two_plus_cos();
    let grid = TorusGrid::new(1.5, 128, 128).unwrap();
    let t = [0.5, 2.0, 4.0];
    let curve = growth_curve_scaled(&p, 0.7, &t, 1.5).unwrap();
    for (ti, c) in t.iter().zip(&curve) {
        let sampled = hs_norm(&transform(&sample_hyperbolic(*ti, &p, &grid)), 0.7);
        assert!((sampled - c).abs() < 1e-10 * c);
    }
    let late: Vec<f64> = (0..20).map(|k| 10.0 * 10f64.powf(k as f64 / 19.0)).collect();
    let slope = fit_power_law(&late, &growth_curve(&p, 1.0, &late).unwrap()).unwrap().exponent;
    assert!((slope - 1.0).abs() < 0.05);
    assert!(growth_curve(&ProfileSpec::constant(2.0), 1.0, &t).is_err());
}

#[test]
fn explicit_family_mass_and_rate() {
    let params = OzawaParams::default();
    for t in [0.0, 0.25, 0.5, 0.75] {
        assert!((ozawa_norms(t, 0.5, &params).unwrap().l2 - PI.sqrt()).abs() < 1e-3);
    }
    let big_t = params.blowup_time();
    let times: Vec<f64> = (0..30).map(|k| big_t * (1.0 - 1e-2 * 1e-2f64.powf(k as f64 / 29.0))).collect();
    let hs: Vec<f64> = times.iter().map(|&t| ozawa_norms(t, 0.8, &params).unwrap().hs).collect();
    let f = fit_rate_for(&times, &hs, 0.8).unwrap();
    assert!((f.p_est - 0.8).abs() < 0.02, "{}", f.p_est);
    assert!((f.t_est - big_t).abs() < 1e-3);
    assert!(ozawa_norms(big_t, 0.8, &params).is_err());
}
