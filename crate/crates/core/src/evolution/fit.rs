use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `v(t) = C (T - t)^{-p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub t_est: f64,
    pub p_est: f64,
    pub c_est: f64,
    /// RMS misfit of `log v`.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// Linearized standard errors of `p` and `T`.
    pub p_stderr: f64,
    pub t_stderr: f64,
    /// Spread-aware uncertainty: `2·p_stderr` plus the shift of `p` when the leading
    /// quarter of the window is dropped.
    pub p_uncertainty: f64,
    /// Set when the optimum sits on the search boundary or `p` is poorly determined;
    /// a wider window is advisable.
    pub ill_conditioned: bool,
    pub s: Option<f64>,
    /// `p ≥ s/2`.
    pub consistent_with_lower_bound: Option<bool>,
    /// `|p - s|`.
    pub pseudo_conformal_gap: Option<f64>,
}

/// Log-log fit of `v(t) = C t^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub residual: f64,
    pub window: (f64, f64),
}

const MIN_SAMPLES: usize = 8;

struct Line {
    intercept: f64,
    slope: f64,
    rss: f64,
}

fn regress(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss = x.iter().zip(y).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Line { intercept, slope, rss }
}

fn check_series(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::FitRejected(format!("{} times but {} values", times.len(), values.len())));
    }
    if times.len() < MIN_SAMPLES {
        return Err(Error::FitRejected(format!("need at least {MIN_SAMPLES} samples, got {}", times.len())));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::FitRejected("times must be finite and strictly increasing".into()));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::FitRejected("values must be finite and positive".into()));
    }
    Ok(())
}

fn log_model(times: &[f64], logv: &[f64], t_blow: f64) -> Line {
    let x: Vec<f64> = times.iter().map(|t| (t_blow - t).ln()).collect();
    regress(&x, logv)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

fn fit_core(times: &[f64], values: &[f64]) -> Result<RateFit> {
    check_series(times, values)?;
    let n = times.len();
    let tol = 1e-12;
    if values.windows(2).any(|w| w[1] < w[0] * (1.0 - tol)) {
        return Err(Error::FitRejected("values are not monotone increasing over the window".into()));
    }
    if values[n - 1] <= values[0] * (1.0 + tol) {
        return Err(Error::FitRejected("no growth over the window".into()));
    }
    let logv: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let t_last = times[n - 1];
    let span = t_last - times[0];
    // Search over u = ln(T - t_last).
    let (lo, hi) = ((span * 1e-9).ln(), (span * 1e3).ln());
    let rss = |u: f64| log_model(times, &logv, t_last + u.exp()).rss;
    let grid = 400;
    let us: Vec<f64> = (0..=grid).map(|i| lo + (hi - lo) * i as f64 / grid as f64).collect();
    let (best, _) = us
        .iter()
        .map(|&u| rss(u))
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, r)| if r < acc.1 { (i, r) } else { acc });
    let a = us[best.saturating_sub(1)];
    let b = us[(best + 1).min(grid)];
    let u = golden_min(rss, a, b, 1e-13);
    let on_boundary = best == 0 || best == grid;

    let t_est = t_last + u.exp();
    let line = log_model(times, &logv, t_est);
    let p_est = -line.slope;
    let c_est = line.intercept.exp();

    // Linearized covariance in (ln C, p, T).
    let dof = n.saturating_sub(3).max(1) as f64;
    let s2 = line.rss / dof;
    let mut jtj = [[0.0; 3]; 3];
    for &t in times {
        let row = [1.0, -(t_est - t).ln(), -p_est / (t_est - t)];
        for i in 0..3 {
            for j in 0..3 {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    let cov = invert3(jtj);
    let (p_stderr, t_stderr) = match cov {
        Some(c) => ((s2 * c[1][1]).max(0.0).sqrt(), (s2 * c[2][2]).max(0.0).sqrt()),
        None => (f64::INFINITY, f64::INFINITY),
    };
    let ill_conditioned = on_boundary || !p_stderr.is_finite() || p_stderr > 0.5 * p_est.abs().max(1e-12);

    Ok(RateFit {
        t_est,
        p_est,
        c_est,
        residual: (line.rss / n as f64).sqrt(),
        window: (times[0], t_last),
        samples: n,
        p_stderr,
        t_stderr,
        p_uncertainty: 2.0 * p_stderr,
        ill_conditioned,
        s: None,
        consistent_with_lower_bound: None,
        pseudo_conformal_gap: None,
    })
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *v = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(inv)
}

/// Fits `v(t) = C (T - t)^{-p}` over `(T, p, C)`: a bounded 1-D search over `T` with the
/// linear fit in `(ln C, p)` solved exactly at each trial `T`.
pub fn fit_rate(times: &[f64], values: &[f64]) -> Result<RateFit> {
    let mut fit = fit_core(times, values)?;
    let n = times.len();
    let drop = n / 4;
    if n - drop >= MIN_SAMPLES {
        if let Ok(sub) = fit_core(&times[drop..], &values[drop..]) {
            fit.p_uncertainty += (sub.p_est - fit.p_est).abs();
        }
    }
    fit.p_uncertainty = fit.p_uncertainty.max(1e-9 * fit.p_est.abs().max(1.0));
    Ok(fit)
}

/// [`fit_rate`] plus classification against the exponent `s`.
pub fn fit_rate_for(times: &[f64], values: &[f64], s: f64) -> Result<RateFit> {
    let mut fit = fit_rate(times, values)?;
    fit.s = Some(s);
    fit.consistent_with_lower_bound = Some(fit.p_est >= s / 2.0);
    fit.pseudo_conformal_gap = Some((fit.p_est - s).abs());
    Ok(fit)
}

/// Fits `v(t) = C t^α` by linear regression of `ln v` on `ln t`.
pub fn fit_power_law(times: &[f64], values: &[f64]) -> Result<PowerLawFit> {
    if times.len() < 2 || times.len() != values.len() {
        return Err(Error::FitRejected("need at least two paired samples".into()));
    }
    if times.iter().chain(values).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::FitRejected("times and values must be finite and positive".into()));
    }
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let line = regress(&x, &y);
    Ok(PowerLawFit {
        exponent: line.slope,
        prefactor: line.intercept.exp(),
        residual: (line.rss / x.len() as f64).sqrt(),
        window: (times[0], times[times.len() - 1]),
    })
}
