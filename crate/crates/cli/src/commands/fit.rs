use std::path::PathBuf;

use dstorus::evolution::{fit_rate_for, RateFit};
use serde::Serialize;

use super::Global;
use crate::error::{CliError, CliResult};
use crate::manifest::{prepare_dir, ManifestBuilder};
use crate::output::{hs_column, Table};

#[derive(Debug, Clone)]
pub struct FitArgs {
    pub input: PathBuf,
    pub s: f64,
    /// Column to fit; defaults to `hs_<s>`, then to the second column.
    pub column: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
}

/// Where the fitted exponent sits relative to `s/2` and `s`.
pub fn classify(fit: &RateFit, s: f64) -> &'static str {
    let p = fit.p_est;
    if (p - s).abs() <= 0.02 {
        "pseudo-conformal rate"
    } else if p + fit.p_uncertainty < s / 2.0 {
        "below the s/2 lower bound"
    } else if p < s / 2.0 {
        "at the s/2 lower bound within uncertainty"
    } else if p < s {
        "between s/2 and s"
    } else {
        "faster than s"
    }
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    input: String,
    column: &'a str,
    samples: usize,
    s: f64,
    classification: &'static str,
    fit: &'a RateFit,
}

pub fn fit(global: &Global, args: &FitArgs) -> CliResult<()> {
    if !(args.s > 0.0) {
        return Err(CliError::Usage(format!("--s must be positive, got {}", args.s)));
    }
    if !args.input.exists() {
        return Err(CliError::Io { path: args.input.clone(), source: std::io::Error::new(std::io::ErrorKind::NotFound, "input CSV not found") });
    }
    let table = Table::read(&args.input)?;
    if table.headers.len() < 2 {
        return Err(CliError::format(&args.input, "need a time column and a value column"));
    }
    let t_col = table.column("t").unwrap_or(&table.columns[0]);
    let name = match &args.column {
        Some(c) => c.clone(),
        None if table.column(&hs_column(args.s)).is_some() => hs_column(args.s),
        None => table.headers[1].clone(),
    };
    let v_col = table
        .column(&name)
        .ok_or_else(|| CliError::format(&args.input, format!("no column `{name}`; available: {}", table.headers.join(", "))))?;
    let (lo, hi) = (args.from.unwrap_or(f64::NEG_INFINITY), args.to.unwrap_or(f64::INFINITY));
    let (times, values): (Vec<f64>, Vec<f64>) = t_col.iter().zip(v_col).filter(|(t, _)| **t >= lo && **t <= hi).map(|(t, v)| (*t, *v)).unzip();
    let fit = fit_rate_for(&times, &values, args.s)?;
    let report = FitReport {
        input: args.input.display().to_string(),
        column: &name,
        samples: times.len(),
        s: args.s,
        classification: classify(&fit, args.s),
        fit: &fit,
    };
    let text = toml::to_string(&report).map_err(|e| CliError::format(&args.input, e.to_string()))?;
    print!("{text}");
    if let Some(dir) = &global.out {
        prepare_dir(dir)?;
        let p = dir.join("fit.toml");
        std::fs::write(&p, &text).map_err(CliError::io(&p))?;
        let input = std::fs::read(&args.input).map_err(CliError::io(&args.input))?;
        let mut m = ManifestBuilder::new(dir, "fit", Default::default(), &input);
        m.output(&p)?;
        m.finish()?;
    }
    Ok(())
}
