use std::path::PathBuf;

use dstorus::exact::{growth_curve_scaled, hyperbolic_residual, ozawa_norms, sample_hyperbolic, sample_on_torus, Analytic, OzawaParams, ProfileSpec, ResidualReport};
use dstorus::{hs_norm, transform};

use super::Global;
use crate::config::InitialKind;
use crate::error::{CliError, CliResult};
use crate::initial::default_cutoff;
use crate::manifest::{prepare_dir, GridRecord, ManifestBuilder};
use crate::output::{fmt, hs_column, write_rows};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactCase {
    Hypnls,
    Ozawa,
    Stationary,
}

impl ExactCase {
    pub fn name(self) -> &'static str {
        match self {
            Self::Hypnls => "hypnls",
            Self::Ozawa => "ozawa",
            Self::Stationary => "stationary",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExactArgs {
    pub case: ExactCase,
    /// Print the largest residual and fail when it exceeds `tolerance`.
    pub check_residual: bool,
    pub tolerance: f64,
    /// Number of log-spaced times before the blow-up time.
    pub samples: usize,
}

struct Written {
    files: Vec<PathBuf>,
    /// Largest residual: pointwise for the torus case, interior `L²` for cut-off data.
    worst: f64,
}

fn residual_row(t: f64, r: &ResidualReport) -> Vec<String> {
    vec![fmt(t), fmt(r.max_abs), fmt(r.l2_inside), fmt(r.l2_annulus), fmt(r.l2_outside)]
}

const RESIDUAL_HEADER: [&str; 5] = ["t", "max_abs", "l2_inside", "l2_annulus", "l2_outside"];

/// `T - t` log-spaced from `10⁻² T` down to `10⁻⁴ T`.
pub fn ozawa_times(blowup: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|k| {
            let frac = if samples > 1 { k as f64 / (samples - 1) as f64 } else { 0.0 };
            blowup * (1.0 - 1e-2 * 1e-2_f64.powf(frac))
        })
        .collect()
}

pub fn exact(global: &Global, args: &ExactArgs) -> CliResult<()> {
    let ctx = global.load()?;
    let solver = &ctx.config.run.solver;
    let grid = solver.grid()?;
    let dir = match (&global.out, args.check_residual) {
        (Some(d), _) => Some(d.as_path()),
        (None, true) => None,
        (None, false) => return Err(CliError::Usage("pass --out DIR, or --check residual to only print the check".into())),
    };
    if let Some(d) = dir {
        prepare_dir(d)?;
    }
    let s_list = &solver.s_list;
    let header = |cols: &[&str]| cols.iter().map(|s| s.to_string()).collect::<Vec<_>>();

    let written = match args.case {
        ExactCase::Hypnls => {
            let profile = match &ctx.config.run.initial.kind {
                InitialKind::Hyperbolic { profile } => profile.clone(),
                _ => ProfileSpec::two_plus_cos(),
            };
            let steps = (solver.t_end / solver.sample_interval).round() as usize;
            let times: Vec<f64> = (0..=steps).map(|k| k as f64 * solver.sample_interval).collect();
            let res: Vec<f64> = times.iter().map(|&t| hyperbolic_residual(t, &profile, &grid)).collect();
            let worst = res.iter().cloned().fold(0.0, f64::max);
            let mut files = Vec::new();
            if let Some(d) = dir {
                let rows: Vec<Vec<String>> = times.iter().zip(&res).map(|(t, r)| vec![fmt(*t), fmt(*r)]).collect();
                let p = d.join("residual.csv");
                write_rows(&p, &header(&["t", "max_abs"]), &rows)?;
                files.push(p);

                let mut h = vec!["t".to_string()];
                let mut cols = Vec::new();
                for &s in s_list {
                    h.push(hs_column(s));
                    h.push(format!("{}_sampled", hs_column(s)));
                    cols.push(growth_curve_scaled(&profile, s, &times, grid.scale())?);
                    cols.push(times.iter().map(|&t| hs_norm(&transform(&sample_hyperbolic(t, &profile, &grid)), s)).collect());
                }
                let rows: Vec<Vec<String>> = times
                    .iter()
                    .enumerate()
                    .map(|(i, t)| std::iter::once(fmt(*t)).chain(cols.iter().map(|c| fmt(c[i]))).collect())
                    .collect();
                let p = d.join("norms.csv");
                write_rows(&p, &h, &rows)?;
                files.push(p);
            }
            Written { files, worst }
        }
        ExactCase::Ozawa | ExactCase::Stationary => {
            let (params, r0, r1) = match &ctx.config.run.initial.kind {
                InitialKind::Ozawa { params, r0, r1 } => (*params, *r0, *r1),
                InitialKind::Stationary { r0, r1 } => (OzawaParams::default(), *r0, *r1),
                _ => (OzawaParams::default(), None, None),
            };
            let cutoff = default_cutoff(grid.scale(), r0, r1);
            let (sol, res_times) = if args.case == ExactCase::Ozawa {
                let big_t = params.blowup_time();
                (Analytic::Ozawa { params, sigma: solver.sigma }, vec![0.0, 0.5 * big_t, 0.9 * big_t])
            } else {
                (Analytic::Stationary { sigma: solver.sigma }, vec![0.0])
            };
            let reports: Vec<ResidualReport> = res_times
                .iter()
                .map(|&t| sample_on_torus(&sol, t, &grid, cutoff).map(|s| s.residual))
                .collect::<Result<_, _>>()?;
            let worst = reports.iter().map(|r| r.l2_inside).fold(0.0, f64::max);
            let mut files = Vec::new();
            if let Some(d) = dir {
                let p = d.join("residual.csv");
                let rows: Vec<Vec<String>> = res_times.iter().zip(&reports).map(|(t, r)| residual_row(*t, r)).collect();
                write_rows(&p, &header(&RESIDUAL_HEADER), &rows)?;
                files.push(p);
                if args.case == ExactCase::Ozawa {
                    let times = ozawa_times(params.blowup_time(), args.samples);
                    let mut h = vec!["t".to_string(), "l2".to_string()];
                    h.extend(s_list.iter().map(|&s| hs_column(s)));
                    h.push("l4".into());
                    let mut rows = Vec::new();
                    for &t in &times {
                        let mut row = vec![fmt(t)];
                        let mut l2l4 = (0.0, 0.0);
                        let mut hs = Vec::new();
                        for &s in s_list {
                            let n = ozawa_norms(t, s, &params)?;
                            l2l4 = (n.l2, n.l4);
                            hs.push(fmt(n.hs));
                        }
                        if s_list.is_empty() {
                            let n = ozawa_norms(t, 0.0, &params)?;
                            l2l4 = (n.l2, n.l4);
                        }
                        row.push(fmt(l2l4.0));
                        row.extend(hs);
                        row.push(fmt(l2l4.1));
                        rows.push(row);
                    }
                    let p = d.join("ozawa_hs.csv");
                    write_rows(&p, &h, &rows)?;
                    files.push(p);
                } else {
                    let u = sample_on_torus(&sol, 0.0, &grid, cutoff)?.field;
                    let spec = transform(&u);
                    let rows: Vec<Vec<String>> = s_list.iter().map(|&s| vec![fmt(s), fmt(hs_norm(&spec, s))]).collect();
                    let p = d.join("norms.csv");
                    write_rows(&p, &header(&["s", "hs"]), &rows)?;
                    files.push(p);
                }
            }
            Written { files, worst }
        }
    };

    if let Some(d) = dir {
        let mut m = ManifestBuilder::new(d, &format!("exact-{}", args.case.name()), ctx.config.provenance.clone(), &ctx.inputs);
        m.manifest.grids.push(GridRecord { scale: grid.scale(), nx: grid.nx(), ny: grid.ny() });
        for f in &written.files {
            m.output(f)?;
        }
        m.finish()?;
    }
    if args.check_residual {
        let what = if args.case == ExactCase::Hypnls { "max_residual" } else { "max_interior_l2_residual" };
        println!("{what} = {:.6e}", written.worst);
        if !(written.worst < args.tolerance) {
            return Err(CliError::Numeric(format!("{what} {:.3e} exceeds the tolerance {:.1e}", written.worst, args.tolerance)));
        }
    }
    Ok(())
}
