use dstorus::evolution::{fit_rate_for, run_simulation, BlowupStatus, Simulation, SolverConfig};
use dstorus::exact::{sample_hyperbolic, ProfileSpec};
use dstorus::{transform, Field, Spectrum, TorusGrid};
use num_complex::Complex64;

fn gaussian(grid: TorusGrid, amp: f64) -> Field {
    let c = std::f64::consts::PI * grid.scale();
    Field::from_fn(grid, |x, y| Complex64::new(amp * (-((x - c).powi(2) + (y - c).powi(2)) / (2.0 * 0.49)).exp(), 0.0)).unwrap()
}

#[test]
fn hyperbolic_family_is_reproduced() {
    let profile = ProfileSpec::new(1.5, vec![0.5], vec![0.25]).unwrap();
    let grid = TorusGrid::new(1.0, 64, 64).unwrap();
    let mut cfg = SolverConfig::new(1.0, 64, 64);
    cfg.e_enabled = false;
    cfg.adaptive = false;
    cfg.dt0 = 1e-2;
    cfg.t_end = 0.5;
    let (traj, report) = run_simulation(&sample_hyperbolic(0.0, &profile, &grid), &cfg).unwrap();
    assert_eq!(report.status, BlowupStatus::Completed);
    let exact = transform(&sample_hyperbolic(0.5, &profile, &grid));
    let mut sim = Simulation::new(&transform(&sample_hyperbolic(0.0, &profile, &grid)), &cfg).unwrap();
    sim.advance_until(0.5);
    assert!(sim.state().sub(&exact).unwrap().l2_norm() < 1e-10 * exact.l2_norm());
    assert!(traj.mass_drift() < 1e-12);
}

#[test]
fn mass_is_conserved_with_the_nonlocal_term() {
    for sigma in [1.0, -1.0] {
        let grid = TorusGrid::new(1.0, 64, 64).unwrap();
        let mut cfg = SolverConfig::new(1.0, 64, 64);
        cfg.sigma = sigma;
        cfg.t_end = 0.5;
        let (traj, report) = run_simulation(&gaussian(grid, 1.0), &cfg).unwrap();
        assert_eq!(report.status, BlowupStatus::Completed);
        assert!(traj.mass_drift() < 1e-10, "{}", traj.mass_drift());
    }
}

#[test]
fn resumed_run_matches_uninterrupted() {
    let grid = TorusGrid::new(1.0, 32, 32).unwrap();
    let u0 = transform(&gaussian(grid, 1.5));
    let mut cfg = SolverConfig::new(1.0, 32, 32);
    cfg.t_end = 0.2;
    let mut full = Simulation::new(&u0, &cfg).unwrap();
    full.advance_until(0.1);
    let (state, t) = (full.state().clone(), full.time());
    let acc = full.trajectory().last().unwrap().l4_integral;
    full.advance_until(0.2);
    let mut resumed = Simulation::resume_with_integral(&state, t, acc, &cfg).unwrap();
    resumed.advance_until(0.2);
    let a = full.trajectory().last().unwrap();
    let b = resumed.trajectory().last().unwrap();
    assert_eq!(a.t, b.t);
    assert!((a.l4_integral - b.l4_integral).abs() < 1e-12 * a.l4_integral);
    assert!(full.state().sub(resumed.state()).unwrap().l2_norm() < 1e-12);
}

#[test]
fn concentrated_data_stop_and_fit_above_the_lower_bound() {
    let grid = TorusGrid::new(1.0, 64, 64).unwrap();
    let mut cfg = SolverConfig::new(1.0, 64, 64);
    cfg.sample_interval = 1e-3;
    cfg.t_end = 0.5;
    let (_, report) = run_simulation(&gaussian(grid, 8.0), &cfg).unwrap();
    assert!(report.status.is_blowup());
    for f in report.fits.iter().filter(|f| f.theorem_range) {
        let fit = f.fit.as_ref().expect("fit present");
        assert!(fit.p_est >= f.s / 2.0 - 0.1, "s = {}: p = {}", f.s, fit.p_est);
    }
}

#[test]
fn synthetic_rate_recovered() {
    let t: Vec<f64> = (0..40).map(|k| 0.5 + 0.49 * k as f64 / 39.0).collect();
    let v: Vec<f64> = t.iter().map(|t| 2.0 * (1.0 - t).powf(-0.35)).collect();
    let f = fit_rate_for(&t, &v, 0.7).unwrap();
    assert!((f.p_est - 0.35).abs() < 1e-4);
    assert!((f.t_est - 1.0).abs() < 1e-4);
    assert_eq!(f.consistent_with_lower_bound, Some(true));
}

#[test]
fn zero_state_stays_zero() {
    let grid = TorusGrid::new(3.0, 16, 16).unwrap();
    let sim = Simulation::new(&Spectrum::zeros(grid), &SolverConfig::new(3.0, 16, 16)).unwrap();
    let (traj, report) = sim.run();
    assert_eq!(report.status, BlowupStatus::Completed);
    assert!(traj.samples.iter().all(|s| s.mass == 0.0 && s.linf == 0.0 && s.l4_integral == 0.0));
}
