//! Acceptance suite: one line per criterion, nonzero exit when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use dstorus::evolution::{fit_power_law, fit_rate_for, rescale_by, rescale_solution, BlowupReport, Simulation, SolverConfig, Stepper, Trajectory};
use dstorus::exact::{growth_curve, ozawa_norms, sample_hyperbolic, OzawaParams, ProfileSpec};
use dstorus::strichartz::{band_trials, bilinear_ratio, spread_by_cell, rows_for, BilinearParams, BilinearSweep, SummaryRow};
use dstorus::{hs_seminorm, inverse_transform, transform, Field, Spectrum, TorusGrid};
use dstorus_cli::checkpoint::Checkpoint;
use dstorus_cli::initial::periodic_gaussian;
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn relative_l2(a: &Spectrum, b: &Spectrum) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

fn run(u0: &Spectrum, cfg: &SolverConfig) -> (Trajectory, BlowupReport, u64) {
    let mut sim = Simulation::new(u0, cfg).unwrap();
    sim.advance_until(cfg.t_end);
    let steps = sim.steps();
    let (t, r) = sim.finish();
    (t, r, steps)
}

fn hyperbolic_config(nx: usize, dt0: f64, t_end: f64) -> SolverConfig {
    let mut c = SolverConfig::new(1.0, nx, nx);
    c.e_enabled = false;
    c.adaptive = false;
    c.dt0 = dt0;
    c.t_end = t_end;
    c.growth_sample_ratio = None;
    c.tail_max = 0.999;
    c
}

fn exact_reproduction() -> Outcome {
    let profile = ProfileSpec::two_plus_cos();
    let grid = TorusGrid::new(1.0, 128, 128).unwrap();
    let mut cfg = hyperbolic_config(128, 1e-3, 1.0);
    cfg.sample_interval = 0.25;
    let start = Instant::now();
    let mut sim = Simulation::new(&transform(&sample_hyperbolic(0.0, &profile, &grid)), &cfg).unwrap();
    sim.advance_until(1.0);
    let secs = start.elapsed().as_secs_f64();
    let err = relative_l2(sim.state(), &transform(&sample_hyperbolic(1.0, &profile, &grid)));
    outcome(err <= 1e-6 && secs < 30.0, format!("relative L2 error {err:.3e} at t = 1 (limit 1e-6), runtime {secs:.2} s (limit 30 s)"))
}

fn log_times(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

fn infinite_time_growth() -> Outcome {
    let profile = ProfileSpec::two_plus_cos();
    let late = log_times(10.0, 100.0, 30);
    let slope = fit_power_law(&late, &growth_curve(&profile, 1.0, &late).unwrap()).unwrap().exponent;

    let nx = 256;
    let grid = TorusGrid::new(1.0, nx, nx).unwrap();
    let mut cfg = hyperbolic_config(nx, 1e-2, 10.0);
    cfg.s_list = vec![1.0];
    cfg.sample_interval = 0.5;
    let (traj, _, _) = run(&transform(&sample_hyperbolic(0.0, &profile, &grid)), &cfg);
    let (times, numeric): (Vec<f64>, Vec<f64>) = traj.samples.iter().filter(|s| s.t >= 1.0 - 1e-12).map(|s| (s.t, s.hs[0])).unzip();
    let analytic = growth_curve(&profile, 1.0, &times).unwrap();
    let curve_err = numeric.iter().zip(&analytic).map(|(n, a)| (n - a).abs() / a).fold(0.0, f64::max);
    let fit_num = fit_power_law(&times, &numeric).unwrap().exponent;
    let fit_ana = fit_power_law(&times, &analytic).unwrap().exponent;
    let fit_err = (fit_num - fit_ana).abs() / fit_ana.abs();
    let pass = (slope - 1.0).abs() <= 0.05 && curve_err <= 1e-3 && fit_err <= 1e-3;
    outcome(
        pass,
        format!(
            "analytic slope on [10, 100] = {slope:.4} (1.00 ± 0.05); solver H^1 vs curve on [1, 10] max rel {curve_err:.2e}, fitted exponents {fit_num:.5} vs {fit_ana:.5} (rel {fit_err:.2e}, limit 1e-3)"
        ),
    )
}

fn ozawa_fit(params: &OzawaParams, s: f64, lo: f64, hi: f64) -> (f64, f64) {
    let big_t = params.blowup_time();
    // log-spaced in T - t between (1 - lo) T and (1 - hi) T
    let gaps = log_times((1.0 - lo) * big_t, (1.0 - hi) * big_t, 40);
    let mut pts: Vec<(f64, f64)> = gaps.iter().map(|g| (big_t - g, ozawa_norms(big_t - g, s, params).unwrap().hs)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (t, v): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let f = fit_rate_for(&t, &v, s).unwrap();
    (f.p_est, f.t_est)
}

fn pseudo_conformal_rate() -> Outcome {
    let params = OzawaParams::default();
    let big_t = params.blowup_time();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.6, 0.8] {
        let (p, t) = ozawa_fit(&params, s, 0.5, 0.99);
        let ok = (p - s).abs() <= 0.02 && (t - big_t).abs() <= 1e-3;
        pass &= ok;
        let (p_near, _) = ozawa_fit(&params, s, 0.99, 0.9999);
        parts.push(format!("s={s}: p={p:.4}, T={t:.5} on [0.5T, 0.99T] ({}); p={p_near:.4} on [0.99T, 0.9999T]", if ok { "ok" } else { "off" }));
    }
    outcome(pass, parts.join("; "))
}

fn explicit_mass() -> Outcome {
    let params = OzawaParams::default();
    let masses: Vec<f64> = [0.0, 0.2, 0.4, 0.6, 0.8].iter().map(|&t| ozawa_norms(t, 0.5, &params).unwrap().l2).collect();
    let target = PI.sqrt();
    let worst = masses.iter().map(|m| (m - target).abs()).fold(0.0, f64::max);
    let spread = masses.iter().map(|m| (m - masses[0]).abs() / masses[0]).fold(0.0, f64::max);
    outcome(worst <= 1e-3 && spread <= 1e-6, format!("max |mass - sqrt(pi)| = {worst:.2e} (limit 1e-3), relative spread over 5 times {spread:.2e} (limit 1e-6)"))
}

struct BlowupRun {
    amplitude: f64,
    report: BlowupReport,
}

/// Gaussian data of width 0.7 at amplitudes 4, 8, 16 on a 64² grid.
fn amplitude_sweep() -> Vec<BlowupRun> {
    let grid = TorusGrid::new(1.0, 64, 64).unwrap();
    let base = transform(&periodic_gaussian(&grid, 0.7, (PI, PI)).unwrap());
    [1.0, 2.0, 4.0]
        .iter()
        .map(|&a| {
            let mut cfg = SolverConfig::new(1.0, 64, 64);
            cfg.sample_interval = 1e-3;
            cfg.t_end = 1.0;
            let (_, report, _) = run(&base.scale(Complex64::new(4.0 * a, 0.0)), &cfg);
            BlowupRun { amplitude: a, report }
        })
        .collect()
}

fn rate_consistency(runs: &[BlowupRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut blowups = 0;
    for r in runs.iter().filter(|r| r.report.status.is_blowup()) {
        blowups += 1;
        for f in r.report.fits.iter().filter(|f| f.theorem_range) {
            match &f.fit {
                Some(fit) => {
                    let ok = fit.p_est >= f.s / 2.0 - 0.1;
                    pass &= ok;
                    parts.push(format!("A={} s={}: p={:.3}", r.amplitude, f.s, fit.p_est));
                }
                None => {
                    pass = false;
                    parts.push(format!("A={} s={}: no fit ({})", r.amplitude, f.s, f.note.clone().unwrap_or_default()));
                }
            }
        }
    }
    outcome(pass, format!("{blowups} blow-up runs; {}", parts.join(", ")))
}

fn local_time_scaling(runs: &[BlowupRun]) -> Outcome {
    let amps: Vec<f64> = runs.iter().map(|r| r.amplitude).collect();
    let times: Vec<f64> = runs.iter().map(|r| r.report.stop_time).collect();
    let monotone = times.windows(2).all(|w| w[1] <= w[0]);
    let fit = fit_power_law(&amps, &times).unwrap();
    let q = -fit.exponent;
    let bounded = amps.iter().zip(&times).all(|(a, t)| *t >= fit.prefactor * a.powf(-q) / 2.0);
    outcome(
        monotone && q <= 4.0 && bounded,
        format!("T(A) = {times:.4?} for A = {amps:?}; fitted q = {q:.3} (limit 4), non-increasing: {monotone}, within factor 2 of c A^-q: {bounded}"),
    )
}

fn smooth_data(grid: TorusGrid, amp: f64) -> Spectrum {
    Spectrum::from_fn(grid, |m, n| {
        let w = amp * (-((m * m + n * n) as f64) / 4.0).exp();
        Complex64::new(w * (1.0 + 0.3 * m as f64), w * (0.5 - 0.2 * n as f64))
    })
    .unwrap()
}

fn evolve(u: &Spectrum, dt: f64, steps: usize) -> Spectrum {
    let g = *u.grid();
    let mut st = Stepper::new(g, &SolverConfig::new(g.scale(), g.nx(), g.ny()));
    let mut c = u.coeffs().to_vec();
    st.truncate(&mut c);
    for _ in 0..steps {
        st.step(&mut c, dt).unwrap();
    }
    Spectrum::new(g, c).unwrap()
}

fn scaling_covariance() -> Outcome {
    let grid = TorusGrid::new(1.0, 64, 64).unwrap();
    let u = smooth_data(grid, 1.0);
    let steps = 20;
    let mut worst: f64 = 0.0;
    for lambda in [0.5, 2.0] {
        // u_λ(t, x) = λ u(λ² t, λ x): evolve for λ² · 0.01 then rescale, or rescale then evolve for 0.01
        let a = rescale_by(&evolve(&u, lambda * lambda * 0.01 / steps as f64, steps), lambda).unwrap();
        let b = evolve(&rescale_by(&u, lambda).unwrap(), 0.01 / steps as f64, steps);
        worst = worst.max(a.sub(&b).unwrap().l2_norm());
    }
    let mut semi: f64 = 0.0;
    let mut mass: f64 = 0.0;
    for amp in [0.2, 1.0, 5.0] {
        let v = smooth_data(grid, amp);
        for s in [0.6, 0.8] {
            let r = rescale_solution(&v, 0.0, s).unwrap();
            semi = semi.max(hs_seminorm(&r.state, s));
            mass = mass.max((r.state.l2_norm() - v.l2_norm()).abs() / v.l2_norm());
        }
    }
    outcome(
        worst <= 1e-8 && semi <= 1.0 + 1e-8 && mass <= 1e-10,
        format!("commutation L2 gap {worst:.2e} (limit 1e-8); max rescaled seminorm {semi:.12} (limit 1 + 1e-8); mass change {mass:.2e} (limit 1e-10)"),
    )
}

/// Cells run cheapest first; the sweep stops once some `(N1, N2)` spreads beyond 4 across `L`.
fn bilinear_uniformity() -> Outcome {
    let seed = 20_240_601;
    let sweep = BilinearSweep { scales: vec![1.0, 2.0, 4.0, 8.0], dyadics: vec![1.0, 2.0, 4.0, 8.0, 16.0], centers: vec![((0, 0), (0, 0))], trials: 50, seed };
    let cells = sweep.cells();
    let total = cells.len();
    let mut sums: Vec<SummaryRow> = Vec::new();
    let mut failure = None;
    for cell in cells {
        let stats = bilinear_ratio(&cell).unwrap();
        sums.push(rows_for(&cell, &stats).1);
        if let Some((_, n1, n2, f)) = spread_by_cell(&sums).into_iter().find(|c| c.3 > 4.0) {
            let cell: Vec<&SummaryRow> = sums.iter().filter(|s| s.n1 == Some(n1) && s.n2 == Some(n2)).collect();
            let maxes: Vec<String> = cell.iter().map(|s| format!("L={}: {:.4}", s.l, s.max)).collect();
            let scaled: Vec<f64> = cell.iter().map(|s| s.l * s.max).collect();
            let scaled_spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
            failure = Some(format!(
                "(N1, N2) = ({n1}, {n2}) spreads by {f:.2} > 4 across L [{}], L x max spreads by {scaled_spread:.3}",
                maxes.join(", ")
            ));
            break;
        }
    }
    // translation check on the cheapest cells
    let mut worst_shift: f64 = 1.0;
    for l in [1.0, 2.0] {
        for (n1, n2) in [(1.0, 1.0), (1.0, 2.0)] {
            let centred = BilinearParams { n1, n2, center1: (0, 0), center2: (0, 0), scale: l, trials: 50, seed };
            let shifted = BilinearParams { center1: (3, -2), center2: (-1, 4), ..centred.clone() };
            let (a, b) = (bilinear_ratio(&centred).unwrap().max, bilinear_ratio(&shifted).unwrap().max);
            worst_shift = worst_shift.max(a / b).max(b / a);
        }
    }
    let shift_ok = worst_shift <= 1.5;
    match failure {
        Some(msg) => outcome(false, format!("{msg}; stopped after {} of {total} cells; translated/centred max ratio {worst_shift:.3} (limit 1.5)", sums.len())),
        None => {
            let spread = spread_by_cell(&sums).into_iter().map(|c| c.3).fold(0.0, f64::max);
            outcome(shift_ok, format!("max spread {spread:.3} over {total} cells; translated/centred {worst_shift:.3}"))
        }
    }
}

fn band_bounds() -> Outcome {
    let cells = [(1.0, 1.0, 1u64), (1.0, 2.0, 4), (2.0, 1.0, 2), (2.0, 2.0, 8)];
    let (mut linf, mut l4): (f64, f64) = (0.0, 0.0);
    let mut n = 0;
    for (i, (l, q, r)) in cells.iter().enumerate() {
        let (a, b) = band_trials(*l, *q, *r, 1, 25, 77 + i as u64).unwrap();
        linf = linf.max(a.max);
        l4 = l4.max(b.max);
        n += a.ratios.len();
    }
    outcome(linf <= 1.0 + 1e-6 && l4 <= 1.0 + 1e-6, format!("{n} trials each: max L-inf ratio {linf:.4}, max L4 ratio {l4:.4} (limit 1 + 1e-6)"))
}

fn infrastructure() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;

    let grid = TorusGrid::new(1.5, 32, 48).unwrap();
    let f = Field::from_fn(grid, |x, y| Complex64::new((x * 1.3).sin() + (2.0 * y).cos().powi(3), (x - y).cos() * 0.2)).unwrap();
    let spec = transform(&f);
    let back = inverse_transform(&spec);
    let round = f.values().iter().zip(back.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let l2_phys = (f.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_area()).sqrt();
    let planch = (l2_phys - spec.l2_norm()).abs() / l2_phys;
    let ok = round <= 1e-12 && planch <= 1e-12;
    pass &= ok;
    parts.push(format!("round-trip {round:.1e}, Plancherel {planch:.1e}"));

    let g = TorusGrid::new(1.0, 32, 32).unwrap();
    let u = smooth_data(g, 1.0);
    let reference = evolve(&u, 0.1 / 512.0, 512);
    let errs: Vec<f64> = [8usize, 16, 32].iter().map(|&k| evolve(&u, 0.1 / k as f64, k).sub(&reference).unwrap().l2_norm()).collect();
    let order = ((errs[0] / errs[1]).log2() + (errs[1] / errs[2]).log2()) / 2.0;
    let ok = (order - 2.0).abs() <= 0.1;
    pass &= ok;
    parts.push(format!("Strang order {order:.3}"));

    let g64 = TorusGrid::new(1.0, 64, 64).unwrap();
    let u0 = transform(&periodic_gaussian(&g64, 0.7, (PI, PI)).unwrap());
    let mut cfg = SolverConfig::new(1.0, 64, 64);
    cfg.t_end = 1.0;
    let (traj, report, _) = run(&u0, &cfg);
    let drift = traj.mass_drift() / traj.samples.last().unwrap().t;
    let ok = !report.status.is_blowup() && drift < 1e-8;
    pass &= ok;
    parts.push(format!("mass drift {drift:.1e}/unit time"));

    let ck = Checkpoint { t: 0.37, sigma: -1.0, e_enabled: true, state: smooth_data(g, 1.0) };
    let bytes = ck.to_bytes();
    let back = Checkpoint::from_bytes(&bytes).unwrap();
    let ok = back.to_bytes() == bytes && back.state.coeffs().iter().zip(ck.state.coeffs()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    pass &= ok;
    parts.push(format!("checkpoint bit-identical: {ok}"));

    let (again, _, _) = run(&u0, &cfg);
    let same = serde_json::to_vec(&again).unwrap() == serde_json::to_vec(&traj).unwrap();
    let p = BilinearParams { n1: 1.0, n2: 2.0, center1: (0, 0), center2: (0, 0), scale: 2.0, trials: 5, seed: 3 };
    let same = same && bilinear_ratio(&p).unwrap() == bilinear_ratio(&p).unwrap();
    pass &= same;
    parts.push(format!("deterministic reruns: {same}"));
    outcome(pass, parts.join("; "))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |i: usize| only.as_ref().is_none_or(|o| o.contains(&i));
    let mut runs: Option<Vec<BlowupRun>> = None;
    let mut failed = 0;
    let names = [
        "exact-solution reproduction",
        "infinite-time growth",
        "pseudo-conformal rate",
        "mass of the explicit family",
        "blow-up rate consistency",
        "local-time scaling",
        "scaling covariance",
        "bilinear uniformity in L",
        "band-bound probes",
        "infrastructure",
    ];
    for (i, name) in names.iter().enumerate() {
        let id = i + 1;
        if !wanted(id) {
            continue;
        }
        let start = Instant::now();
        if (id == 5 || id == 6) && runs.is_none() {
            runs = Some(amplitude_sweep());
        }
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| match id {
            1 => exact_reproduction(),
            2 => infinite_time_growth(),
            3 => pseudo_conformal_rate(),
            4 => explicit_mass(),
            5 => rate_consistency(runs.as_ref().unwrap()),
            6 => local_time_scaling(runs.as_ref().unwrap()),
            7 => scaling_covariance(),
            8 => bilinear_uniformity(),
            9 => band_bounds(),
            _ => infrastructure(),
        }));
        let o = result.unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!("criterion {id:>2} [{}] {name}: {} ({:.1} s)", if o.pass { "PASS" } else { "FAIL" }, o.detail, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
