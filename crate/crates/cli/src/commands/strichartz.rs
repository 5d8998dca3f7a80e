use std::path::Path;

use dstorus::strichartz::{
    band_trials, bilinear_ratio, rows_for, semiclassical_l4, spread_by_cell, trilinear_adversarial, trilinear_random, BilinearSweep,
    AdversarialCase, SemiclassicalParams, SummaryRow, SweepRow, TrialStats, TrilinearSweep,
};

use super::Global;
use crate::config::LabSpec;
use crate::error::{CliError, CliResult};
use crate::manifest::{prepare_dir, ManifestBuilder};
use crate::output::{fmt, fmt_opt, write_rows};

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_trials(path: &Path, rows: &[SweepRow]) -> CliResult<()> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![fmt(r.l), fmt_opt(r.n1), fmt_opt(r.n2), opt(r.r), fmt_opt(r.h), r.trial.to_string(), fmt(r.ratio), r.seed.to_string()])
        .collect();
    write_rows(path, &header(&["L", "N1", "N2", "R", "h", "trial", "ratio", "seed"]), &body)
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> CliResult<()> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.l),
                fmt_opt(r.n1),
                fmt_opt(r.n2),
                opt(r.r),
                fmt_opt(r.h),
                r.center.clone(),
                r.trials.to_string(),
                fmt(r.max),
                fmt(r.mean),
                fmt(r.std),
                r.max_nodes.to_string(),
                r.converged.to_string(),
            ]
        })
        .collect();
    let cols = ["L", "N1", "N2", "R", "h", "center", "trials", "max", "mean", "std", "max_nodes", "converged"];
    write_rows(path, &header(&cols), &body)
}

fn write_adversarial(path: &Path, cases: &[AdversarialCase]) -> CliResult<()> {
    let body: Vec<Vec<String>> = cases.iter().map(|c| vec![fmt(c.low), fmt(c.high), fmt(c.max_ratio)]).collect();
    write_rows(path, &header(&["low", "high", "max_ratio"]), &body)
}

fn trial_rows(stats: &TrialStats, l: f64, n: Option<f64>, r: Option<u64>, h: Option<f64>) -> Vec<SweepRow> {
    stats
        .ratios
        .iter()
        .zip(&stats.seeds)
        .enumerate()
        .map(|(trial, (&ratio, &seed))| SweepRow { l, n1: n, n2: n, r, h, trial, ratio, seed })
        .collect()
}

fn summary(stats: &TrialStats, l: f64, n: Option<f64>, r: Option<u64>, h: Option<f64>, center: &str) -> SummaryRow {
    SummaryRow {
        l,
        n1: n,
        n2: n,
        r,
        h,
        center: center.into(),
        trials: stats.ratios.len(),
        max: stats.max,
        mean: stats.mean,
        std: stats.std,
        max_nodes: stats.max_nodes,
        converged: stats.all_converged,
    }
}

/// Bilinear cells run cheapest first so a failing configuration shows up early.
fn bilinear(scales: &[f64], dyadics: &[f64], centers: &[[i64; 4]], trials: usize, seed: u64) -> CliResult<(Vec<SweepRow>, Vec<SummaryRow>)> {
    let sweep = BilinearSweep {
        scales: scales.to_vec(),
        dyadics: dyadics.to_vec(),
        centers: centers.iter().map(|c| ((c[0], c[1]), (c[2], c[3]))).collect(),
        trials,
        seed,
    };
    let mut rows = Vec::new();
    let mut sums = Vec::new();
    for cell in sweep.cells() {
        let stats = bilinear_ratio(&cell)?;
        log::info!("bilinear L={} N1={} N2={}: max {:.4e}", cell.scale, cell.n1, cell.n2, stats.max);
        let (r, s) = rows_for(&cell, &stats);
        rows.extend(r);
        sums.push(s);
    }
    Ok((rows, sums))
}

pub fn strichartz(global: &Global) -> CliResult<()> {
    let ctx = global.load()?;
    let lab = ctx
        .config
        .lab
        .clone()
        .ok_or_else(|| CliError::Usage("the configuration has no [lab] section; set at least `lab.probe`".into()))?;
    let seed = ctx.config.seed.ok_or_else(|| CliError::Usage("lab sweeps need an explicit seed: --seed N, `seed = N` or DSTORUS_SEED".into()))?;
    let dir = global.out_dir()?;
    prepare_dir(dir)?;

    let mut outputs = Vec::new();
    let (rows, sums): (Vec<SweepRow>, Vec<SummaryRow>) = match &lab {
        LabSpec::Bilinear { trials, scales, dyadics, centers } => {
            let (rows, sums) = bilinear(scales, dyadics, centers, *trials, seed)?;
            let spread: Vec<Vec<String>> = spread_by_cell(&sums).into_iter().map(|(c, n1, n2, f)| vec![c, fmt(n1), fmt(n2), fmt(f)]).collect();
            let p = dir.join("spread.csv");
            write_rows(&p, &header(&["center", "N1", "N2", "spread"]), &spread)?;
            outputs.push(p);
            (rows, sums)
        }
        LabSpec::Semiclassical { trials, h, t0, localization } => {
            let mut rows = Vec::new();
            let mut sums = Vec::new();
            for &hv in h {
                let stats = semiclassical_l4(&SemiclassicalParams { h: hv, t0: *t0, localization: *localization, trials: *trials, seed })?;
                rows.extend(trial_rows(&stats, 1.0, Some(1.0 / hv), None, Some(hv)));
                sums.push(summary(&stats, 1.0, Some(1.0 / hv), None, Some(hv), "0"));
            }
            (rows, sums)
        }
        LabSpec::Bands { trials, scales, q, r, periods } => {
            let mut rows = Vec::new();
            let mut sums = Vec::new();
            for &l in scales {
                for &qv in q {
                    for &rv in r {
                        let (linf, l4) = band_trials(l, qv, rv, *periods, *trials, seed)?;
                        rows.extend(trial_rows(&linf, l, Some(qv), Some(rv), None));
                        rows.extend(trial_rows(&l4, l, Some(qv), Some(rv), None));
                        sums.push(summary(&linf, l, Some(qv), Some(rv), None, "linf"));
                        sums.push(summary(&l4, l, Some(qv), Some(rv), None, "l4"));
                    }
                }
            }
            (rows, sums)
        }
        LabSpec::Trilinear { trials, scale, extent, modulation, config, adversarial_lows } => {
            let sweep = TrilinearSweep { scale: *scale, extent: *extent, modulation: *modulation, trials: *trials, seed, config: *config };
            let stats = trilinear_random(&sweep)?;
            let rows = trial_rows(&stats, *scale, Some(*extent), None, None);
            let sums = vec![summary(&stats, *scale, Some(*extent), None, None, "random")];
            if !adversarial_lows.is_empty() {
                let cases = trilinear_adversarial(&sweep, adversarial_lows)?;
                let p = dir.join("adversarial.csv");
                write_adversarial(&p, &cases)?;
                outputs.push(p);
            }
            (rows, sums)
        }
    };
    let rp = dir.join("rows.csv");
    write_trials(&rp, &rows)?;
    let sp = dir.join("summary.csv");
    write_summary(&sp, &sums)?;
    outputs.push(rp);
    outputs.push(sp);

    let mut m = ManifestBuilder::new(dir, "strichartz", ctx.config.provenance.clone(), &ctx.inputs);
    m.manifest.seeds.push(seed);
    for p in &outputs {
        m.output(p)?;
    }
    m.finish()?;
    Ok(())
}
