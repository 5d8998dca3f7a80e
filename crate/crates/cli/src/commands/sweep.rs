use rayon::prelude::*;

use super::run::{simulate, write_run};
use super::Global;
use crate::config::RunSpec;
use crate::error::{CliError, CliResult};
use crate::initial::build_initial;
use crate::manifest::{prepare_dir, GridRecord, ManifestBuilder};
use crate::output::{fmt, fmt_opt, write_rows};

struct Outcome {
    row: Vec<String>,
    steps: u64,
    non_finite: bool,
}

fn one(global_dir: &std::path::Path, index: usize, spec: &RunSpec, seed: Option<u64>, ctx: &super::Context) -> CliResult<Outcome> {
    let dir = global_dir.join(format!("run_{index:03}"));
    prepare_dir(&dir)?;
    let u0 = build_initial(&spec.initial, &spec.solver, seed)?;
    let (traj, report, steps, _) = simulate(&dir, &spec.solver, &u0, (0.0, 0.0), None)?;
    let outputs = write_run(&dir, &spec.label, &traj, &report, steps, None)?;
    let mut m = ManifestBuilder::new(&dir, "sweep-run", ctx.config.provenance.clone(), &ctx.inputs);
    m.manifest.seeds.extend(seed);
    m.manifest.grids.push(GridRecord { scale: spec.solver.scale, nx: spec.solver.nx, ny: spec.solver.ny });
    m.manifest.steps = steps;
    for p in &outputs {
        m.output(p)?;
    }
    m.finish()?;

    let s = &spec.solver;
    let mut row = vec![
        index.to_string(),
        spec.label.clone(),
        fmt(s.scale),
        s.nx.to_string(),
        fmt(spec.initial.amplitude),
        fmt(s.sigma),
        fmt(s.dt0),
        report.status.as_str().to_string(),
        fmt(report.stop_time),
        steps.to_string(),
    ];
    for &sv in &s.s_list {
        let f = report.fits.iter().find(|f| f.s == sv).and_then(|f| f.fit.as_ref());
        row.push(fmt_opt(f.map(|f| f.p_est)));
        row.push(fmt_opt(f.map(|f| f.t_est)));
    }
    Ok(Outcome { row, steps, non_finite: report.non_finite })
}

pub fn sweep(global: &Global) -> CliResult<()> {
    let ctx = global.load()?;
    if ctx.config.sweep.is_empty() {
        return Err(CliError::Usage("the configuration has no [sweep] section; add at least one axis such as `L = [1, 2]`".into()));
    }
    let dir = global.out_dir()?;
    prepare_dir(dir)?;
    let seed = ctx.config.seed;
    let outcomes: Vec<CliResult<Outcome>> = ctx.config.sweep.par_iter().enumerate().map(|(i, spec)| one(dir, i, spec, seed, &ctx)).collect();
    let outcomes: Vec<Outcome> = outcomes.into_iter().collect::<CliResult<_>>()?;

    let mut header: Vec<String> = ["run", "label", "L", "nx", "amplitude", "sigma", "dt0", "status", "stop_time", "steps"].map(String::from).to_vec();
    for &s in &ctx.config.run.solver.s_list {
        header.push(format!("p_{s}"));
        header.push(format!("T_{s}"));
    }
    let rows: Vec<Vec<String>> = outcomes.iter().map(|o| o.row.clone()).collect();
    let summary = dir.join("summary.csv");
    write_rows(&summary, &header, &rows)?;

    let mut m = ManifestBuilder::new(dir, "sweep", ctx.config.provenance.clone(), &ctx.inputs);
    m.manifest.seeds.extend(seed);
    m.manifest.grids = ctx.config.sweep.iter().map(|s| GridRecord { scale: s.solver.scale, nx: s.solver.nx, ny: s.solver.ny }).collect();
    m.manifest.steps = outcomes.iter().map(|o| o.steps).sum();
    m.output(&summary)?;
    m.finish()?;

    let bad = outcomes.iter().filter(|o| o.non_finite).count();
    if bad > 0 {
        return Err(CliError::Numeric(format!("{bad} sweep runs became non-finite; see {}", summary.display())));
    }
    Ok(())
}
