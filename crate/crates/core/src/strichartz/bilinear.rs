use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{gaussian_on_box, rng_for, trial_seed};
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::Spectrum;
use crate::freqbox::{rational, FreqBox};
use crate::grid::TorusGrid;
use crate::operators::p_symbol;
use crate::quadrature::gauss_legendre;

const QUAD_TOL: f64 = 1e-6;
const MAX_NODES: usize = 1 << 14;

/// Smallest even 5-smooth integer strictly above `n`.
pub fn smooth_above(n: usize) -> usize {
    let mut m = n + 1;
    loop {
        if m.is_multiple_of(2) {
            let mut r = m;
            for p in [2, 3, 5] {
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

/// Nonzero modes of a spectrum re-indexed onto another grid, with their `P` symbols.
struct Sparse {
    idx: Vec<usize>,
    p: Vec<f64>,
    c: Vec<Complex64>,
}

impl Sparse {
    fn new(spec: &Spectrum, target: &TorusGrid) -> Result<Self> {
        let l = target.scale();
        let mut out = Sparse { idx: vec![], p: vec![], c: vec![] };
        for ((m, n), c) in spec.iter_modes() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            match (target.index_x(m), target.index_y(n)) {
                (Some(i), Some(j)) => {
                    out.idx.push(i * target.ny() + j);
                    out.p.push(p_symbol(l, m, n));
                    out.c.push(c);
                }
                _ => return Err(Error::InvalidParameter(format!("mode ({m}, {n}) not representable"))),
            }
        }
        Ok(out)
    }

    fn p_range(&self) -> (f64, f64) {
        let lo = self.p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Physical values of `e^{itP}u` on the target grid.
    fn values_at(&self, t: f64, grid: &TorusGrid, fft: &Fft2, buf: &mut Vec<Complex64>) {
        buf.clear();
        buf.resize(grid.len(), Complex64::new(0.0, 0.0));
        for ((&i, &p), &c) in self.idx.iter().zip(&self.p).zip(&self.c) {
            buf[i] = c * Complex64::from_polar(1.0, p * t);
        }
        fft.inverse(buf);
        let s = 1.0 / grid.period();
        for z in buf.iter_mut() {
            *z *= s;
        }
    }
}

fn max_extent(spec: &Spectrum) -> i64 {
    spec.iter_modes()
        .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
        .map(|((m, n), _)| m.abs().max(n.abs()))
        .max()
        .unwrap_or(0)
}

/// A time integral computed with Gauss–Legendre nodes doubled until two successive values agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadValue {
    pub value: f64,
    pub nodes: usize,
    pub rel_change: f64,
    pub converged: bool,
}

fn integrate(a: f64, b: f64, start: usize, f: impl Fn(f64) -> f64) -> QuadValue {
    let eval = |n: usize| {
        let (x, w) = gauss_legendre(n, a, b);
        x.iter().zip(&w).map(|(&t, &wt)| wt * f(t)).sum::<f64>()
    };
    let mut n = start.max(4);
    let mut prev = eval(n);
    loop {
        let next = eval(2 * n);
        let rel = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
        n *= 2;
        if rel < QUAD_TOL || 2 * n > MAX_NODES {
            return QuadValue { value: next, nodes: n, rel_change: rel, converged: rel < QUAD_TOL };
        }
        prev = next;
    }
}

/// Start count for a trigonometric integrand with frequencies spread over `omega` on an interval of length `len`.
fn start_nodes(omega: f64, len: f64) -> usize {
    (omega * len / 4.0).ceil() as usize + 16
}

/// `‖e^{itP}u₁ · e^{itP}u₂‖_{L²([0,1] × T²_L)}`, evaluated without aliasing on a product grid.
pub fn bilinear_norm(u1: &Spectrum, u2: &Spectrum) -> Result<QuadValue> {
    if u1.grid().scale() != u2.grid().scale() {
        return Err(Error::GridMismatch);
    }
    let k = max_extent(u1) + max_extent(u2);
    let n = smooth_above(2 * k as usize);
    let grid = TorusGrid::new(u1.grid().scale(), n, n)?;
    let (s1, s2) = (Sparse::new(u1, &grid)?, Sparse::new(u2, &grid)?);
    let ((a1, b1), (a2, b2)) = (s1.p_range(), s2.p_range());
    let omega = 2.0 * ((b1 + b2) - (a1 + a2));
    let fft = Fft2::cached(n, n);
    let da = grid.cell_area();
    let f = |t: f64| {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        s1.values_at(t, &grid, &fft, &mut x);
        s2.values_at(t, &grid, &fft, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a * b).norm_sqr()).sum::<f64>() * da
    };
    let mut q = integrate(0.0, 1.0, start_nodes(omega, 1.0), f);
    q.value = q.value.sqrt();
    Ok(q)
}

/// `‖e^{itP}v₀‖_{L⁴(J × T²_L)}` on `J = [t0, t0 + len]`.
pub fn l4_norm_on(v0: &Spectrum, t0: f64, len: f64) -> Result<QuadValue> {
    if !(len > 0.0) {
        return Err(Error::InvalidParameter("interval length must be positive".into()));
    }
    let n = smooth_above(4 * max_extent(v0) as usize);
    let grid = TorusGrid::new(v0.grid().scale(), n, n)?;
    let s = Sparse::new(v0, &grid)?;
    let (a, b) = s.p_range();
    let fft = Fft2::cached(n, n);
    let da = grid.cell_area();
    let f = |t: f64| {
        let mut x = Vec::new();
        s.values_at(t, &grid, &fft, &mut x);
        x.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * da
    };
    let mut q = integrate(t0, t0 + len, start_nodes(4.0 * (b - a), len), f);
    q.value = q.value.powf(0.25);
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub ratios: Vec<f64>,
    pub seeds: Vec<u64>,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub max_nodes: usize,
    pub all_converged: bool,
}

impl TrialStats {
    pub fn from_ratios(ratios: Vec<f64>, seeds: Vec<u64>) -> Self {
        let q = QuadValue { value: 0.0, nodes: 0, rel_change: 0.0, converged: true };
        Self::from_trials(ratios.into_iter().zip(seeds).map(|(r, s)| (r, s, q)).collect())
    }

    fn from_trials(results: Vec<(f64, u64, QuadValue)>) -> Self {
        let ratios: Vec<f64> = results.iter().map(|r| r.0).collect();
        let n = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / n;
        let var = if ratios.len() > 1 { ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Self {
            max: ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean,
            std: var.sqrt(),
            seeds: results.iter().map(|r| r.1).collect(),
            max_nodes: results.iter().map(|r| r.2.nodes).max().unwrap_or(0),
            all_converged: results.iter().all(|r| r.2.converged),
            ratios,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearParams {
    pub n1: f64,
    pub n2: f64,
    pub center1: (i64, i64),
    pub center2: (i64, i64),
    pub scale: f64,
    pub trials: usize,
    pub seed: u64,
}

fn dyadic(n: f64) -> bool {
    n >= 1.0 && n.log2().fract() == 0.0
}

fn annulus_at(center: (i64, i64), n: f64) -> Result<FreqBox> {
    FreqBox::annulus(BigRational::from_integer(center.0.into()), BigRational::from_integer(center.1.into()), rational(n))
}

/// Grid holding both annuli for the ensemble draw.
fn draw_grid(scale: f64, boxes: &[&FreqBox]) -> Result<TorusGrid> {
    let mut k = 0;
    for b in boxes {
        let lb = b.resolve(scale);
        if b.lattice_count(scale) == 0 {
            return Err(Error::EmptySupport("annulus has no lattice points".into()));
        }
        let (ex, ey) = lb.extent();
        k = k.max(ex).max(ey);
    }
    TorusGrid::new(scale, smooth_above(2 * k as usize), smooth_above(2 * k as usize))
}

/// Monte-Carlo statistics of `‖e^{itP}u₁ e^{itP}u₂‖_{L²([0,1]×T²_L)} / (min(N₁,N₂)^{1/2} ‖u₁‖ ‖u₂‖)`
/// for Gaussian data on the two annuli.
pub fn bilinear_ratio(params: &BilinearParams) -> Result<TrialStats> {
    if !dyadic(params.n1) || !dyadic(params.n2) {
        return Err(Error::InvalidParameter("N1 and N2 must be dyadic and at least 1".into()));
    }
    if params.trials == 0 {
        return Err(Error::InvalidParameter("at least one trial".into()));
    }
    let b1 = annulus_at(params.center1, params.n1)?;
    let b2 = annulus_at(params.center2, params.n2)?;
    let grid = draw_grid(params.scale, &[&b1, &b2])?;
    let norm = params.n1.min(params.n2).sqrt();
    let tag = cell_tag(params);
    let results: Result<Vec<_>> = (0..params.trials)
        .into_par_iter()
        .map(|trial| {
            let mut t = tag.clone();
            t.push(trial as u64);
            let mut rng = rng_for(params.seed, &t);
            let u1 = gaussian_on_box(grid, &b1, &mut rng)?;
            let u2 = gaussian_on_box(grid, &b2, &mut rng)?;
            let q = bilinear_norm(&u1, &u2)?;
            Ok((q.value / (norm * u1.l2_norm() * u2.l2_norm()), trial_seed(params.seed, &t), q))
        })
        .collect();
    Ok(TrialStats::from_trials(results?))
}

fn cell_tag(p: &BilinearParams) -> Vec<u64> {
    vec![
        p.scale.to_bits(),
        p.n1.to_bits(),
        p.n2.to_bits(),
        p.center1.0 as u64,
        p.center1.1 as u64,
        p.center2.0 as u64,
        p.center2.1 as u64,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Localization {
    /// `h⁻¹ ≤ Max(|m|, |n|) ≤ 2h⁻¹`
    Annulus,
    /// `Max(|m|, |n|) ≤ 2h⁻¹`
    Cube,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalParams {
    pub h: f64,
    pub t0: f64,
    pub localization: Localization,
    pub trials: usize,
    pub seed: u64,
}

/// Monte-Carlo statistics of `‖e^{itP}v₀‖_{L⁴(J×T²)} / ‖v₀‖_{L²}` on `T²_1` with `|J| = h`.
pub fn semiclassical_l4(params: &SemiclassicalParams) -> Result<TrialStats> {
    let inv = 1.0 / params.h;
    if !(params.h > 0.0) || !dyadic(inv) {
        return Err(Error::InvalidParameter(format!("1/h must be dyadic, got h = {}", params.h)));
    }
    if inv > 64.0 {
        return Err(Error::InvalidParameter(format!("band 1/h = {inv} exceeds the resolvable range")));
    }
    if params.trials == 0 {
        return Err(Error::InvalidParameter("at least one trial".into()));
    }
    let bx = match params.localization {
        Localization::Annulus => FreqBox::centered_annulus(inv)?,
        Localization::Cube => FreqBox::centered_cube(2.0 * inv)?,
    };
    let k = 2 * inv as usize;
    let grid = TorusGrid::new(1.0, smooth_above(2 * k), smooth_above(2 * k))?;
    let tag = vec![params.h.to_bits(), params.t0.to_bits(), params.localization as u64];
    let results: Result<Vec<_>> = (0..params.trials)
        .into_par_iter()
        .map(|trial| {
            let mut t = tag.clone();
            t.push(trial as u64);
            let mut rng = rng_for(params.seed, &t);
            let v0 = gaussian_on_box(grid, &bx, &mut rng)?;
            let q = l4_norm_on(&v0, params.t0, params.h)?;
            Ok((q.value / v0.l2_norm(), trial_seed(params.seed, &t), q))
        })
        .collect();
    Ok(TrialStats::from_trials(results?))
}

/// One trial of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N1")]
    pub n1: Option<f64>,
    #[serde(rename = "N2")]
    pub n2: Option<f64>,
    #[serde(rename = "R")]
    pub r: Option<u64>,
    pub h: Option<f64>,
    pub trial: usize,
    pub ratio: f64,
    pub seed: u64,
}

/// Per-cell aggregate of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N1")]
    pub n1: Option<f64>,
    #[serde(rename = "N2")]
    pub n2: Option<f64>,
    #[serde(rename = "R")]
    pub r: Option<u64>,
    pub h: Option<f64>,
    pub center: String,
    pub trials: usize,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub max_nodes: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearSweep {
    pub scales: Vec<f64>,
    pub dyadics: Vec<f64>,
    pub centers: Vec<((i64, i64), (i64, i64))>,
    pub trials: usize,
    pub seed: u64,
}

impl BilinearSweep {
    /// Cells `(center pair, N1 ≤ N2, L)` sorted by estimated cost.
    pub fn cells(&self) -> Vec<BilinearParams> {
        let mut out = Vec::new();
        for &(c1, c2) in &self.centers {
            for (i, &n1) in self.dyadics.iter().enumerate() {
                for &n2 in &self.dyadics[i..] {
                    for &l in &self.scales {
                        out.push(BilinearParams { n1, n2, center1: c1, center2: c2, scale: l, trials: self.trials, seed: self.seed });
                    }
                }
            }
        }
        out.sort_by(|a, b| cost(a).total_cmp(&cost(b)));
        out
    }
}

/// Rough work estimate: grid points times quadrature nodes.
pub fn cost(p: &BilinearParams) -> f64 {
    let reach = |c: (i64, i64), n: f64| c.0.abs().max(c.1.abs()) as f64 + 2.0 * n;
    let k = p.scale * (reach(p.center1, p.n1) + reach(p.center2, p.n2));
    let omega = 2.0 * (reach(p.center1, p.n1).powi(2) + reach(p.center2, p.n2).powi(2));
    (2.0 * k).powi(2) * (2.0 * k).ln().max(1.0) * (omega / 4.0 + 16.0)
}

pub fn rows_for(p: &BilinearParams, stats: &TrialStats) -> (Vec<SweepRow>, SummaryRow) {
    let rows = stats
        .ratios
        .iter()
        .zip(&stats.seeds)
        .enumerate()
        .map(|(trial, (&ratio, &seed))| SweepRow { l: p.scale, n1: Some(p.n1), n2: Some(p.n2), r: None, h: None, trial, ratio, seed })
        .collect();
    let summary = SummaryRow {
        l: p.scale,
        n1: Some(p.n1),
        n2: Some(p.n2),
        r: None,
        h: None,
        center: format!("{:?}/{:?}", p.center1, p.center2),
        trials: stats.ratios.len(),
        max: stats.max,
        mean: stats.mean,
        std: stats.std,
        max_nodes: stats.max_nodes,
        converged: stats.all_converged,
    };
    (rows, summary)
}

/// `max_L(max ratio) / min_L(max ratio)` for each `(center, N1, N2)` present in the summaries.
pub fn spread_by_cell(summaries: &[SummaryRow]) -> Vec<(String, f64, f64, f64)> {
    let mut keys: Vec<(String, f64, f64)> = Vec::new();
    for s in summaries {
        let key = (s.center.clone(), s.n1.unwrap_or(0.0), s.n2.unwrap_or(0.0));
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(c, n1, n2)| {
            let maxes: Vec<f64> = summaries
                .iter()
                .filter(|s| s.center == c && s.n1 == Some(n1) && s.n2 == Some(n2))
                .map(|s| s.max)
                .collect();
            let hi = maxes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = maxes.iter().cloned().fold(f64::INFINITY, f64::min);
            (c, n1, n2, hi / lo)
        })
        .collect()
}

/// `(h/(4π²))^{1/4}`: the ratio of a single Fourier mode on `T²_1` over an interval of length `h`.
pub fn single_mode_l4(h: f64) -> f64 {
    (h / (4.0 * PI * PI)).powf(0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_above(8), 10);
        assert_eq!(smooth_above(31), 32);
        assert_eq!(smooth_above(100), 108);
    }

    #[test]
    fn two_mode_closed_form() {
        let g = TorusGrid::new(1.0, 8, 8).unwrap();
        let a = Spectrum::basis(g, 1, 0).unwrap();
        let b = Spectrum::basis(g, 0, 1).unwrap();
        let q = bilinear_norm(&a, &b).unwrap();
        assert!(q.converged);
        assert_relative_eq!(q.value, 1.0 / (2.0 * PI), max_relative = 1e-12);
    }

    #[test]
    fn oscillating_pair_needs_quadrature() {
        // Mode (2,0) receives e₂₀·e₀₀ and e₁₁·e₁,₋₁ with phases 4t and 0.
        let g = TorusGrid::new(1.0, 16, 16).unwrap();
        let mut a = Spectrum::basis(g, 2, 0).unwrap();
        a.set(1, 1, Complex64::new(1.0, 0.0)).unwrap();
        let mut b = Spectrum::basis(g, 0, 0).unwrap();
        b.set(1, -1, Complex64::new(1.0, 0.0)).unwrap();
        let q = bilinear_norm(&a, &b).unwrap();
        let expect = ((4.0 + 2.0 * 4f64.sin() / 4.0) / (4.0 * PI * PI)).sqrt();
        assert_relative_eq!(q.value, expect, max_relative = 1e-9);
    }

    #[test]
    fn single_mode_l4_value() {
        let g = TorusGrid::new(1.0, 16, 16).unwrap();
        let v = Spectrum::basis(g, 2, 1).unwrap();
        let q = l4_norm_on(&v, 0.3, 0.5).unwrap();
        assert_relative_eq!(q.value, single_mode_l4(0.5), max_relative = 1e-12);
    }

    #[test]
    fn bilinear_rejects_bad_input() {
        let mut p = BilinearParams { n1: 3.0, n2: 1.0, center1: (0, 0), center2: (0, 0), scale: 1.0, trials: 2, seed: 0 };
        assert!(bilinear_ratio(&p).is_err());
        p.n1 = 1.0;
        p.trials = 0;
        assert!(bilinear_ratio(&p).is_err());
    }

    #[test]
    fn bilinear_is_reproducible() {
        let p = BilinearParams { n1: 1.0, n2: 2.0, center1: (0, 0), center2: (0, 0), scale: 1.0, trials: 3, seed: 5 };
        let a = bilinear_ratio(&p).unwrap();
        let b = bilinear_ratio(&p).unwrap();
        assert_eq!(a, b);
        assert!(a.all_converged);
        assert!(a.ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    }

    #[test]
    fn semiclassical_bounded_in_h() {
        let mut maxes = Vec::new();
        for h in [0.5, 0.25, 0.125] {
            let s = semiclassical_l4(&SemiclassicalParams { h, t0: 0.0, localization: Localization::Annulus, trials: 4, seed: 1 }).unwrap();
            maxes.push(s.max);
        }
        let hi = maxes.iter().cloned().fold(0.0, f64::max);
        let lo = maxes.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo <= 2.0, "{maxes:?}");
    }

    #[test]
    fn semiclassical_rejects_non_dyadic() {
        let p = SemiclassicalParams { h: 0.3, t0: 0.0, localization: Localization::Cube, trials: 1, seed: 0 };
        assert!(semiclassical_l4(&p).is_err());
    }

    #[test]
    fn sweep_cells_are_cost_ordered() {
        let sw = BilinearSweep { scales: vec![1.0, 8.0], dyadics: vec![1.0, 4.0], centers: vec![((0, 0), (0, 0))], trials: 1, seed: 0 };
        let cells = sw.cells();
        assert_eq!(cells.len(), 6);
        assert!(cells.windows(2).all(|w| cost(&w[0]) <= cost(&w[1])));
    }
}
