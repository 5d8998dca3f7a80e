use std::path::{Path, PathBuf};

use dstorus::evolution::{BlowupReport, Simulation, SolverConfig, Trajectory};
use serde::Serialize;

use super::Global;
use crate::checkpoint::Checkpoint;
use crate::error::{CliError, CliResult};
use crate::initial::build_initial;
use crate::manifest::{prepare_dir, GridRecord, ManifestBuilder};
use crate::output::{write_trajectory, Table};

#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    /// Checkpoint every N sample intervals.
    pub checkpoint_every: Option<u64>,
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub label: &'a str,
    pub steps: u64,
    pub samples: usize,
    pub mass_drift: f64,
    pub resumed_from: Option<f64>,
    #[serde(flatten)]
    pub blowup: &'a BlowupReport,
}

/// `∫‖u‖⁴_{L⁴}` at time `t`, read back from the trajectory next to a checkpoint directory.
fn recover_l4acc(checkpoint: &Path, t: f64) -> Option<f64> {
    let run_dir = checkpoint.parent()?.parent()?;
    let table = Table::read(&run_dir.join("trajectory.csv")).ok()?;
    let times = table.column("t")?;
    let acc = table.column("l4acc")?;
    times.iter().zip(acc).rev().find(|(s, _)| (**s - t).abs() <= 1e-12 * t.abs().max(1.0)).map(|(_, a)| *a)
}

fn check_compatible(ck: &Checkpoint, config: &SolverConfig, path: &Path) -> CliResult<()> {
    let g = ck.state.grid();
    let mut bad = Vec::new();
    if (g.scale(), g.nx(), g.ny()) != (config.scale, config.nx, config.ny) {
        bad.push(format!("checkpoint grid L={} {}x{} differs from the configured L={} {}x{}", g.scale(), g.nx(), g.ny(), config.scale, config.nx, config.ny));
    }
    if ck.sigma != config.sigma || ck.e_enabled != config.e_enabled {
        bad.push(format!("checkpoint nonlinearity (sigma={}, e_enabled={}) differs from the configuration", ck.sigma, ck.e_enabled));
    }
    if ck.t >= config.t_end {
        bad.push(format!("checkpoint time {} is not before t_end = {}", ck.t, config.t_end));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::format(path, bad.join("; ")))
    }
}

/// Integrates one configured run into `dir`, returning the trajectory, report and step count.
pub(crate) fn simulate(
    dir: &Path,
    solver: &SolverConfig,
    state: &dstorus::Spectrum,
    start: (f64, f64),
    checkpoint_every: Option<u64>,
) -> CliResult<(Trajectory, BlowupReport, u64, Vec<PathBuf>)> {
    let mut sim = Simulation::resume_with_integral(state, start.0, start.1, solver)?;
    let mut written = Vec::new();
    match checkpoint_every {
        Some(0) => return Err(CliError::Usage("--checkpoint-every must be at least 1".into())),
        Some(n) => {
            let stride = n as f64 * solver.sample_interval;
            let ck_dir = dir.join("checkpoints");
            std::fs::create_dir_all(&ck_dir).map_err(CliError::io(&ck_dir))?;
            let mut k = (start.0 / stride + 1e-9).floor() as u64 + 1;
            while !sim.is_finished() {
                sim.advance_until(k as f64 * stride);
                let path = ck_dir.join(format!("ckpt_{k:06}.bin"));
                Checkpoint { t: sim.time(), sigma: solver.sigma, e_enabled: solver.e_enabled, state: sim.state().clone() }.save(&path)?;
                written.push(path);
                k += 1;
            }
        }
        None => sim.advance_until(solver.t_end),
    }
    let steps = sim.steps();
    let (traj, report) = sim.finish();
    Ok((traj, report, steps, written))
}

pub(crate) fn write_run(dir: &Path, label: &str, traj: &Trajectory, report: &BlowupReport, steps: u64, resumed_from: Option<f64>) -> CliResult<Vec<PathBuf>> {
    let tpath = dir.join("trajectory.csv");
    write_trajectory(&tpath, traj)?;
    let rpath = dir.join("report.json");
    let rep = RunReport { label, steps, samples: traj.samples.len(), mass_drift: traj.mass_drift(), resumed_from, blowup: report };
    let text = serde_json::to_string_pretty(&rep).map_err(|e| CliError::format(&rpath, e.to_string()))?;
    std::fs::write(&rpath, text).map_err(CliError::io(&rpath))?;
    Ok(vec![tpath, rpath])
}

pub fn run(global: &Global, args: &RunArgs) -> CliResult<()> {
    let ctx = global.load()?;
    let dir = global.out_dir()?;
    prepare_dir(dir)?;
    let solver = &ctx.config.run.solver;

    let (state, start) = match &args.resume {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            check_compatible(&ck, solver, path)?;
            let acc = recover_l4acc(path, ck.t).unwrap_or_else(|| {
                log::warn!("no trajectory row at t = {} next to {}; l4acc restarts from zero", ck.t, path.display());
                0.0
            });
            (ck.state, (ck.t, acc))
        }
        None => (build_initial(&ctx.config.run.initial, solver, ctx.config.seed)?, (0.0, 0.0)),
    };
    let (traj, report, steps, checkpoints) = simulate(dir, solver, &state, start, args.checkpoint_every)?;
    let mut outputs = write_run(dir, "run", &traj, &report, steps, args.resume.as_ref().map(|_| start.0))?;
    outputs.extend(checkpoints);

    let mut m = ManifestBuilder::new(dir, "run", ctx.config.provenance.clone(), &ctx.inputs);
    m.manifest.seeds.extend(ctx.config.seed);
    m.manifest.grids.push(GridRecord { scale: solver.scale, nx: solver.nx, ny: solver.ny });
    m.manifest.steps = steps;
    for p in &outputs {
        m.output(p)?;
    }
    m.finish()?;

    log::info!("run finished: {} at t = {} after {steps} steps", report.status.as_str(), report.stop_time);
    if report.non_finite {
        return Err(CliError::Numeric(format!("state became non-finite after t = {}; outputs up to that point are in {}", report.stop_time, dir.display())));
    }
    Ok(())
}
