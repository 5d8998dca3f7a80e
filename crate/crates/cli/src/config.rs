//! TOML configuration with environment overrides, defaults and per-value provenance.
//!
//! Sections: `[grid]`, `[time]`, `[nonlinearity]`, `[diagnostics]`, `[initial]`, `[sweep]`,
//! `[lab]`, plus top-level `seed` and `threads`. Keys of the first five sections may also be
//! written at top level (`L = 1` means `grid.L`). Environment variables `DSTORUS_<SECTION>_<KEY>`
//! (or `DSTORUS_<KEY>` for top-level keys) override the file; command-line flags override both.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use dstorus::evolution::SolverConfig;
use dstorus::exact::{OzawaParams, ProfileSpec};
use dstorus::strichartz::{Localization, TrilinearConfig};
use serde::Serialize;
use toml::Value;

use crate::error::{CliError, CliResult};

pub const ENV_PREFIX: &str = "DSTORUS_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    Int,
    Bool,
    Str,
    FloatList,
    IntList,
    IntRows,
    /// Float, or `false` to disable.
    FloatOrOff,
}

type Schema = &'static [(&'static str, Kind)];

const TOP: Schema = &[("seed", Kind::Int), ("threads", Kind::Int)];

const SECTIONS: &[(&str, Schema)] = &[
    ("grid", &[("L", Kind::Float), ("nx", Kind::Int), ("ny", Kind::Int)]),
    (
        "time",
        &[
            ("dt0", Kind::Float),
            ("t_end", Kind::Float),
            ("adaptive", Kind::Bool),
            ("dt_min_factor", Kind::Float),
            ("sample_interval", Kind::Float),
            ("growth_sample_ratio", Kind::FloatOrOff),
        ],
    ),
    ("nonlinearity", &[("sigma", Kind::Float), ("e_enabled", Kind::Bool), ("dealias", Kind::Bool)]),
    ("diagnostics", &[("s_list", Kind::FloatList), ("linf_max", Kind::Float), ("tail_max", Kind::Float)]),
    (
        "initial",
        &[
            ("kind", Kind::Str),
            ("amplitude", Kind::Float),
            ("width", Kind::Float),
            ("center", Kind::FloatList),
            ("m", Kind::Int),
            ("n", Kind::Int),
            ("mean", Kind::Float),
            ("cos", Kind::FloatList),
            ("sin", Kind::FloatList),
            ("a", Kind::Float),
            ("b", Kind::Float),
            ("r0", Kind::Float),
            ("r1", Kind::Float),
            ("extent", Kind::Float),
        ],
    ),
    (
        "sweep",
        &[
            ("L", Kind::FloatList),
            ("nx", Kind::IntList),
            ("amplitude", Kind::FloatList),
            ("sigma", Kind::FloatList),
            ("dt0", Kind::FloatList),
        ],
    ),
    (
        "lab",
        &[
            ("probe", Kind::Str),
            ("trials", Kind::Int),
            ("L", Kind::FloatList),
            ("N", Kind::FloatList),
            ("centers", Kind::IntRows),
            ("h", Kind::FloatList),
            ("t0", Kind::Float),
            ("localization", Kind::Str),
            ("Q", Kind::FloatList),
            ("R", Kind::IntList),
            ("periods", Kind::Int),
            ("extent", Kind::Float),
            ("modulation", Kind::Float),
            ("s", Kind::Float),
            ("b", Kind::Float),
            ("b_prime", Kind::Float),
            ("adversarial_lows", Kind::FloatList),
        ],
    ),
];

/// Sections whose keys may appear at top level.
const FLAT: [&str; 5] = ["grid", "time", "nonlinearity", "diagnostics", "initial"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    File,
    Env,
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvEntry {
    pub value: String,
    pub source: Source,
}

pub type Provenance = BTreeMap<String, ProvEntry>;

fn schema_kind(section: Option<&str>, key: &str) -> Option<(String, Kind)> {
    match section {
        None => TOP.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)).map(|(k, t)| (k.to_string(), *t)),
        Some(sec) => SECTIONS
            .iter()
            .find(|(s, _)| *s == sec)
            .and_then(|(_, keys)| keys.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)))
            .map(|(k, t)| (format!("{sec}.{k}"), *t)),
    }
}

/// Resolves a top-level key to its canonical path.
fn resolve_top(key: &str) -> Option<(String, Kind)> {
    schema_kind(None, key).or_else(|| FLAT.iter().find_map(|s| schema_kind(Some(s), key)))
}

fn resolve_env(rest: &str) -> Option<(String, Kind)> {
    let lower = rest.to_ascii_lowercase();
    if let Some((head, key)) = lower.split_once('_') {
        if SECTIONS.iter().any(|(s, _)| *s == head) {
            if let Some(hit) = schema_kind(Some(head), key) {
                return Some(hit);
            }
        }
    }
    resolve_top(&lower)
}

fn check_kind(path: &str, kind: Kind, v: &Value) -> Result<(), String> {
    let ok = match kind {
        Kind::Float => v.is_float() || v.is_integer(),
        Kind::Int => v.as_integer().is_some_and(|i| i >= 0),
        Kind::Bool => v.is_bool(),
        Kind::Str => v.is_str(),
        Kind::FloatOrOff => v.is_float() || v.is_integer() || v.as_bool() == Some(false),
        Kind::FloatList => v.as_array().is_some_and(|a| a.iter().all(|x| x.is_float() || x.is_integer())),
        Kind::IntList => v.as_array().is_some_and(|a| a.iter().all(|x| x.as_integer().is_some_and(|i| i >= 0))),
        Kind::IntRows => v
            .as_array()
            .is_some_and(|a| a.iter().all(|row| row.as_array().is_some_and(|r| r.len() == 4 && r.iter().all(Value::is_integer)))),
    };
    if ok {
        Ok(())
    } else {
        let want = match kind {
            Kind::Float => "a number",
            Kind::Int => "a nonnegative integer",
            Kind::Bool => "a boolean",
            Kind::Str => "a string",
            Kind::FloatOrOff => "a number or false",
            Kind::FloatList => "an array of numbers",
            Kind::IntList => "an array of nonnegative integers",
            Kind::IntRows => "an array of [a1, b1, a2, b2] integer rows",
        };
        Err(format!("`{path}` must be {want}, got {v}"))
    }
}

/// Raw values keyed by canonical path, before typing.
#[derive(Debug, Default)]
pub struct Layers {
    values: BTreeMap<String, (Value, Source)>,
    errors: Vec<String>,
}

impl Layers {
    pub fn from_text(text: &str) -> Self {
        let mut out = Self::default();
        let table: toml::Table = match text.parse() {
            Ok(t) => t,
            Err(e) => {
                out.errors.push(format!("not valid TOML: {}", e.message()));
                return out;
            }
        };
        for (key, value) in table {
            match (&value, SECTIONS.iter().find(|(s, _)| *s == key)) {
                (Value::Table(inner), Some(_)) => {
                    for (k, v) in inner {
                        match schema_kind(Some(&key), k) {
                            Some((path, _)) if k.as_str() == path.split_once('.').unwrap().1 => out.put(path, v.clone(), Source::File),
                            _ => out.errors.push(format!("unknown key `{key}.{k}`")),
                        }
                    }
                }
                (_, Some(_)) => out.errors.push(format!("`{key}` must be a table")),
                _ => match resolve_top(&key) {
                    Some((path, _)) if path.rsplit('.').next() == Some(key.as_str()) => {
                        if out.values.contains_key(&path) {
                            out.errors.push(format!("`{key}` is given both at top level and as `{path}`"));
                        }
                        out.put(path, value, Source::File)
                    }
                    _ => out.errors.push(format!("unknown key `{key}`")),
                },
            }
        }
        out
    }

    fn put(&mut self, path: String, value: Value, source: Source) {
        self.values.insert(path, (value, source));
    }

    /// Applies `DSTORUS_*` variables; values are parsed as TOML literals, falling back to strings.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) {
        for (name, raw) in vars {
            let Some(rest) = name.strip_prefix(ENV_PREFIX) else { continue };
            match resolve_env(rest) {
                Some((path, _)) => {
                    let value = format!("v = {raw}")
                        .parse::<toml::Table>()
                        .ok()
                        .and_then(|mut t| t.remove("v"))
                        .unwrap_or(Value::String(raw.clone()));
                    self.put(path, value, Source::Env);
                }
                None => self.errors.push(format!("environment variable `{name}` does not name a configuration key")),
            }
        }
    }

    pub fn apply_flag(&mut self, path: &str, value: Value) {
        self.put(path.to_string(), value, Source::Flag);
    }

    pub fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.values.keys().any(|k| k.starts_with(&prefix))
    }
}

/// Typed reads with defaults, recording provenance and collecting every error.
struct Reader<'a> {
    layers: &'a Layers,
    prov: Provenance,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn raw(&mut self, path: &str) -> Option<&'a Value> {
        let (sec, key) = match path.split_once('.') {
            Some((s, k)) => (Some(s), k),
            None => (None, path),
        };
        let (_, kind) = schema_kind(sec, key).expect("path is in the schema");
        let (v, src) = self.layers.values.get(path)?;
        if let Err(e) = check_kind(path, kind, v) {
            self.errors.push(e);
            return None;
        }
        self.prov.insert(path.to_string(), ProvEntry { value: v.to_string(), source: *src });
        Some(v)
    }

    fn default<T: std::fmt::Debug>(&mut self, path: &str, v: T) -> T {
        self.prov.insert(path.to_string(), ProvEntry { value: format!("{v:?}"), source: Source::Default });
        v
    }

    fn f64(&mut self, path: &str, d: f64) -> f64 {
        match self.raw(path) {
            Some(v) => v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).unwrap(),
            None => self.default(path, d),
        }
    }

    fn opt_f64(&mut self, path: &str) -> Option<f64> {
        self.raw(path).map(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).unwrap())
    }

    fn int(&mut self, path: &str, d: u64) -> u64 {
        match self.raw(path) {
            Some(v) => v.as_integer().unwrap() as u64,
            None => self.default(path, d),
        }
    }

    fn opt_int(&mut self, path: &str) -> Option<u64> {
        self.raw(path).map(|v| v.as_integer().unwrap() as u64)
    }

    fn signed(&mut self, path: &str, d: i64) -> i64 {
        match self.layers.values.get(path) {
            Some((v, src)) if v.is_integer() => {
                self.prov.insert(path.to_string(), ProvEntry { value: v.to_string(), source: *src });
                v.as_integer().unwrap()
            }
            Some((v, _)) => {
                self.errors.push(format!("`{path}` must be an integer, got {v}"));
                d
            }
            None => self.default(path, d),
        }
    }

    fn bool(&mut self, path: &str, d: bool) -> bool {
        match self.raw(path) {
            Some(v) => v.as_bool().unwrap(),
            None => self.default(path, d),
        }
    }

    fn str(&mut self, path: &str, d: &str) -> String {
        match self.raw(path) {
            Some(v) => v.as_str().unwrap().to_string(),
            None => self.default(path, d.to_string()),
        }
    }

    fn floats(&mut self, path: &str, d: &[f64]) -> Vec<f64> {
        match self.raw(path) {
            Some(v) => v.as_array().unwrap().iter().map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)).unwrap()).collect(),
            None => self.default(path, d.to_vec()),
        }
    }

    fn opt_floats(&mut self, path: &str) -> Option<Vec<f64>> {
        self.raw(path).map(|v| v.as_array().unwrap().iter().map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)).unwrap()).collect())
    }

    fn ints(&mut self, path: &str, d: &[u64]) -> Vec<u64> {
        match self.raw(path) {
            Some(v) => v.as_array().unwrap().iter().map(|x| x.as_integer().unwrap() as u64).collect(),
            None => self.default(path, d.to_vec()),
        }
    }

    fn opt_ints(&mut self, path: &str) -> Option<Vec<u64>> {
        self.raw(path).map(|v| v.as_array().unwrap().iter().map(|x| x.as_integer().unwrap() as u64).collect())
    }

    fn rows(&mut self, path: &str, d: &[[i64; 4]]) -> Vec<[i64; 4]> {
        match self.raw(path) {
            Some(v) => v
                .as_array()
                .unwrap()
                .iter()
                .map(|r| {
                    let r = r.as_array().unwrap();
                    [0, 1, 2, 3].map(|i| r[i].as_integer().unwrap())
                })
                .collect(),
            None => self.default(path, d.to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialKind {
    Zero,
    Mode { m: i64, n: i64 },
    /// `exp(-|x - c|²/(2w²))` periodized; `center` defaults to the middle of the torus.
    Gaussian { width: f64, center: Option<(f64, f64)> },
    Hyperbolic { profile: ProfileSpec },
    Ozawa { params: OzawaParams, r0: Option<f64>, r1: Option<f64> },
    Stationary { r0: Option<f64>, r1: Option<f64> },
    /// Gaussian coefficients on the cube `Max(|m|,|n|)/L ≤ extent`, scaled to unit mass.
    Random { extent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialSpec {
    pub amplitude: f64,
    pub kind: InitialKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub label: String,
    pub solver: SolverConfig,
    pub initial: InitialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "probe", rename_all = "snake_case")]
pub enum LabSpec {
    Bilinear { trials: usize, scales: Vec<f64>, dyadics: Vec<f64>, centers: Vec<[i64; 4]> },
    Semiclassical { trials: usize, h: Vec<f64>, t0: f64, localization: Localization },
    Bands { trials: usize, scales: Vec<f64>, q: Vec<f64>, r: Vec<u64>, periods: u32 },
    Trilinear { trials: usize, scale: f64, extent: f64, modulation: f64, config: TrilinearConfig, adversarial_lows: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadedConfig {
    pub run: RunSpec,
    /// Expanded sweep runs; empty without a `[sweep]` section.
    pub sweep: Vec<RunSpec>,
    pub lab: Option<LabSpec>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub provenance: Provenance,
}

/// Inputs that override the file, highest priority last.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub env: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

pub fn parse_config(text: &str, overrides: &Overrides) -> CliResult<LoadedConfig> {
    let mut layers = Layers::from_text(text);
    layers.apply_env(overrides.env.iter().cloned());
    if let Some(s) = overrides.seed {
        layers.apply_flag("seed", Value::Integer(s as i64));
    }
    if let Some(t) = overrides.threads {
        layers.apply_flag("threads", Value::Integer(t as i64));
    }
    resolve(&layers)
}

fn resolve(layers: &Layers) -> CliResult<LoadedConfig> {
    let mut r = Reader { layers, prov: Provenance::new(), errors: layers.errors.clone() };
    let seed = r.opt_int("seed");
    let threads = r.opt_int("threads").map(|t| t as usize);
    if threads == Some(0) {
        r.errors.push("`threads` must be at least 1".into());
    }

    let d = SolverConfig::new(1.0, 128, 128);
    let scale = r.f64("grid.L", d.scale);
    let nx = r.int("grid.nx", d.nx as u64) as usize;
    let ny = match r.opt_int("grid.ny") {
        Some(v) => v as usize,
        None => r.default("grid.ny", nx),
    };
    let mut solver = SolverConfig::new(scale, nx, ny);
    solver.dt0 = r.f64("time.dt0", d.dt0);
    solver.t_end = r.f64("time.t_end", d.t_end);
    solver.adaptive = r.bool("time.adaptive", d.adaptive);
    solver.dt_min_factor = r.f64("time.dt_min_factor", d.dt_min_factor);
    solver.sample_interval = r.f64("time.sample_interval", d.sample_interval);
    solver.growth_sample_ratio = match r.raw("time.growth_sample_ratio") {
        Some(Value::Boolean(false)) => None,
        Some(v) => Some(v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).unwrap()),
        None => r.default("time.growth_sample_ratio", d.growth_sample_ratio),
    };
    solver.sigma = r.f64("nonlinearity.sigma", d.sigma);
    solver.e_enabled = r.bool("nonlinearity.e_enabled", d.e_enabled);
    solver.dealias = r.bool("nonlinearity.dealias", d.dealias);
    solver.s_list = r.floats("diagnostics.s_list", &d.s_list);
    solver.linf_max = r.f64("diagnostics.linf_max", d.linf_max);
    solver.tail_max = r.f64("diagnostics.tail_max", d.tail_max);
    for &s in &solver.s_list {
        if !(s > 0.0) {
            r.errors.push(format!("`diagnostics.s_list` entry {s} must be positive; tracked exponents are compared with the range (1/2, 1)"));
        }
    }
    if let Err(e) = solver.validate() {
        let msg = e.to_string();
        let body = msg.split_once(": ").map(|x| x.1).unwrap_or(&msg).to_string();
        r.errors.extend(body.split("; ").map(String::from));
    }

    let initial = read_initial(&mut r, scale, seed);
    let run = RunSpec { label: "run".into(), solver, initial };
    let sweep = if layers.has_section("sweep") { expand_sweep(&mut r, &run) } else { Vec::new() };
    let lab = if layers.has_section("lab") { read_lab(&mut r) } else { None };

    if r.errors.is_empty() {
        Ok(LoadedConfig { run, sweep, lab, seed, threads, provenance: r.prov })
    } else {
        Err(CliError::Config(r.errors))
    }
}

fn read_initial(r: &mut Reader, scale: f64, seed: Option<u64>) -> InitialSpec {
    let kind = r.str("initial.kind", "zero");
    let amplitude = r.f64("initial.amplitude", 1.0);
    if !amplitude.is_finite() {
        r.errors.push("`initial.amplitude` must be finite".into());
    }
    let cutoff = |r: &mut Reader| (r.opt_f64("initial.r0"), r.opt_f64("initial.r1"));
    let kind = match kind.as_str() {
        "zero" => InitialKind::Zero,
        "mode" => InitialKind::Mode { m: r.signed("initial.m", 1), n: r.signed("initial.n", 0) },
        "gaussian" => {
            let width = r.f64("initial.width", 0.7);
            if !(width > 0.0) {
                r.errors.push(format!("`initial.width` must be positive, got {width}"));
            }
            let center = match r.opt_floats("initial.center") {
                Some(c) if c.len() == 2 => Some((c[0], c[1])),
                Some(c) => {
                    r.errors.push(format!("`initial.center` needs two coordinates, got {}", c.len()));
                    None
                }
                None => None,
            };
            InitialKind::Gaussian { width, center }
        }
        "hyperbolic" => {
            let mean = r.f64("initial.mean", 2.0);
            let cos = r.floats("initial.cos", &[1.0]);
            let sin = r.floats("initial.sin", &[]);
            match ProfileSpec::new(mean, cos, sin) {
                Ok(profile) => InitialKind::Hyperbolic { profile },
                Err(e) => {
                    r.errors.push(format!("initial profile: {e}"));
                    InitialKind::Zero
                }
            }
        }
        "ozawa" => {
            let a = r.f64("initial.a", 1.0);
            let b = r.f64("initial.b", -1.0);
            let (r0, r1) = cutoff(r);
            match OzawaParams::new(a, b, 100.0) {
                Ok(params) => InitialKind::Ozawa { params, r0, r1 },
                Err(e) => {
                    r.errors.push(format!("initial Ozawa data: {e}"));
                    InitialKind::Zero
                }
            }
        }
        "stationary" => {
            let (r0, r1) = cutoff(r);
            InitialKind::Stationary { r0, r1 }
        }
        "random" => {
            let extent = r.f64("initial.extent", 4.0);
            if !(extent * scale >= 0.0) {
                r.errors.push(format!("`initial.extent` must be nonnegative, got {extent}"));
            }
            if seed.is_none() {
                r.errors.push("random initial data need a seed (`seed`, --seed or DSTORUS_SEED)".into());
            }
            InitialKind::Random { extent }
        }
        other => {
            r.errors.push(format!("`initial.kind` = {other:?} is not one of zero, mode, gaussian, hyperbolic, ozawa, stationary, random"));
            InitialKind::Zero
        }
    };
    InitialSpec { amplitude, kind }
}

fn expand_sweep(r: &mut Reader, base: &RunSpec) -> Vec<RunSpec> {
    let ls = r.opt_floats("sweep.L");
    let nxs = r.opt_ints("sweep.nx");
    let amps = r.opt_floats("sweep.amplitude");
    let sigmas = r.opt_floats("sweep.sigma");
    let dts = r.opt_floats("sweep.dt0");
    let axes: Vec<(&str, Vec<f64>)> = [
        ("L", ls),
        ("nx", nxs.map(|v| v.into_iter().map(|x| x as f64).collect())),
        ("amplitude", amps),
        ("sigma", sigmas),
        ("dt0", dts),
    ]
    .into_iter()
    .filter_map(|(n, v)| v.map(|v| (n, v)))
    .collect();
    for (name, values) in &axes {
        if values.is_empty() {
            r.errors.push(format!("sweep axis `{name}` is empty"));
        }
    }
    let mut runs = vec![(base.clone(), Vec::<String>::new())];
    for (name, values) in &axes {
        let mut next = Vec::new();
        for (spec, label) in &runs {
            for &v in values {
                let mut s = spec.clone();
                match *name {
                    "L" => s.solver.scale = v,
                    "nx" => {
                        s.solver.nx = v as usize;
                        s.solver.ny = v as usize;
                    }
                    "amplitude" => s.initial.amplitude = v,
                    "sigma" => s.solver.sigma = v,
                    _ => s.solver.dt0 = v,
                }
                let mut l = label.clone();
                l.push(format!("{name}={v}"));
                next.push((s, l));
            }
        }
        runs = next;
    }
    let mut out = Vec::new();
    for (mut spec, label) in runs {
        if let Err(e) = spec.solver.validate() {
            r.errors.push(format!("sweep run {}: {e}", label.join(",")));
        }
        spec.label = label.join(",");
        out.push(spec);
    }
    out
}

fn read_lab(r: &mut Reader) -> Option<LabSpec> {
    let probe = r.str("lab.probe", "bilinear");
    let trials = r.int("lab.trials", 50) as usize;
    if trials == 0 {
        r.errors.push("`lab.trials` must be at least 1".into());
    }
    let dyadic = |v: f64| v > 0.0 && v.log2().fract() == 0.0;
    let spec = match probe.as_str() {
        "bilinear" => {
            let scales = r.floats("lab.L", &[1.0, 2.0, 4.0, 8.0]);
            let dyadics = r.floats("lab.N", &[1.0, 2.0, 4.0]);
            let centers = r.rows("lab.centers", &[[0, 0, 0, 0]]);
            if dyadics.iter().any(|&n| !(n >= 1.0 && dyadic(n))) {
                r.errors.push(format!("`lab.N` entries must be dyadic and at least 1, got {dyadics:?}"));
            }
            LabSpec::Bilinear { trials, scales, dyadics, centers }
        }
        "semiclassical" => {
            let h = r.floats("lab.h", &[0.5, 0.25, 0.125, 0.0625]);
            if h.iter().any(|&h| !(h > 0.0 && dyadic(1.0 / h))) {
                r.errors.push(format!("`lab.h` entries must have dyadic inverses, got {h:?}"));
            }
            let t0 = r.f64("lab.t0", 0.0);
            let localization = match r.str("lab.localization", "annulus").as_str() {
                "annulus" => Localization::Annulus,
                "cube" => Localization::Cube,
                other => {
                    r.errors.push(format!("`lab.localization` = {other:?} is not annulus or cube"));
                    Localization::Annulus
                }
            };
            LabSpec::Semiclassical { trials, h, t0, localization }
        }
        "bands" => {
            let scales = r.floats("lab.L", &[1.0, 2.0]);
            let q = r.floats("lab.Q", &[0.5, 1.0, 2.0]);
            let rr = r.ints("lab.R", &[1, 2, 4, 8]);
            if rr.iter().any(|&x| x == 0 || !x.is_power_of_two()) {
                r.errors.push(format!("`lab.R` entries must be powers of two, got {rr:?}"));
            }
            let periods = r.int("lab.periods", 1) as u32;
            LabSpec::Bands { trials, scales, q, r: rr, periods }
        }
        "trilinear" => {
            let scales = r.floats("lab.L", &[1.0]);
            if scales.len() != 1 {
                r.errors.push(format!("the trilinear probe takes a single `lab.L`, got {scales:?}"));
            }
            let scale = scales.first().copied().unwrap_or(1.0);
            let extent = r.f64("lab.extent", 8.0);
            let modulation = r.f64("lab.modulation", 2.0);
            let d = TrilinearConfig::default();
            let config = TrilinearConfig { s: r.f64("lab.s", d.s), b: r.f64("lab.b", d.b), b_prime: r.f64("lab.b_prime", d.b_prime) };
            if let Err(e) = config.validate() {
                r.errors.push(e.to_string());
            }
            let adversarial_lows = r.floats("lab.adversarial_lows", &[1.0]);
            LabSpec::Trilinear { trials, scale, extent, modulation, config, adversarial_lows }
        }
        other => {
            r.errors.push(format!("`lab.probe` = {other:?} is not one of bilinear, semiclassical, bands, trilinear"));
            return None;
        }
    };
    Some(spec)
}

/// Center of the torus, the default placement of localized data.
pub fn torus_center(scale: f64) -> (f64, f64) {
    (PI * scale, PI * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<LoadedConfig> {
        parse_config(text, &Overrides::default())
    }

    #[test]
    fn minimal_flat_config() {
        let c = parse("L = 1\nnx = 128\nny = 128\ns_list = [0.75]\ndt0 = 1e-3\nt_end = 1").unwrap();
        assert_eq!(c.run.solver.nx, 128);
        assert_eq!(c.run.solver.s_list, vec![0.75]);
        assert_eq!(c.provenance["grid.L"].source, Source::File);
        assert_eq!(c.provenance["time.sample_interval"].source, Source::Default);
        assert!(c.sweep.is_empty() && c.lab.is_none());
    }

    #[test]
    fn nested_sections_and_sweep_expansion() {
        let c = parse("[grid]\nL = 1\nnx = 32\n[sweep]\nL = [1, 2, 4, 8]\n").unwrap();
        assert_eq!(c.sweep.len(), 4);
        assert_eq!(c.sweep[3].solver.scale, 8.0);
        assert_eq!(c.sweep[3].label, "L=8");
        let c = parse("[grid]\nnx = 32\n[sweep]\nL = [1, 2]\namplitude = [1, 2, 4]\n").unwrap();
        assert_eq!(c.sweep.len(), 6);
    }

    #[test]
    fn all_violations_reported_together() {
        let err = parse("[grid]\nnx = 127\nbogus = 1\n[time]\ndt0 = -1\nt_end = \"x\"\n").unwrap_err();
        let CliError::Config(list) = err else { panic!("{err}") };
        let text = list.join("\n");
        assert!(text.contains("grid.bogus"), "{text}");
        assert!(text.contains("127"), "{text}");
        assert!(text.contains("dt0"), "{text}");
        assert!(text.contains("time.t_end"), "{text}");
        assert!(list.len() >= 4);
    }

    #[test]
    fn nonpositive_exponent_rejected() {
        let err = parse("s_list = [0.0, 0.7]").unwrap_err();
        assert!(err.to_string().contains("must be positive"));
    }

    #[test]
    fn env_and_flags_override_with_provenance() {
        let o = Overrides {
            env: vec![("DSTORUS_GRID_NX".into(), "64".into()), ("DSTORUS_TIME_T_END".into(), "0.5".into()), ("PATH".into(), "/bin".into())],
            seed: Some(7),
            threads: None,
        };
        let c = parse_config("seed = 3\n[grid]\nnx = 32", &o).unwrap();
        assert_eq!(c.run.solver.nx, 64);
        assert_eq!(c.run.solver.t_end, 0.5);
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.provenance["grid.nx"].source, Source::Env);
        assert_eq!(c.provenance["seed"].source, Source::Flag);
        let bad = Overrides { env: vec![("DSTORUS_NOPE".into(), "1".into())], ..Default::default() };
        assert!(parse_config("", &bad).is_err());
    }

    #[test]
    fn random_data_require_seed() {
        assert!(parse("[initial]\nkind = \"random\"").is_err());
        assert!(parse("seed = 1\n[initial]\nkind = \"random\"").is_ok());
    }

    #[test]
    fn lab_sections() {
        let c = parse("[lab]\nprobe = \"semiclassical\"\nh = [0.5, 0.25]\ntrials = 3").unwrap();
        assert!(matches!(c.lab, Some(LabSpec::Semiclassical { trials: 3, .. })));
        assert!(parse("[lab]\nprobe = \"bands\"\nR = [3]").is_err());
        assert!(parse("[lab]\nprobe = \"nope\"").is_err());
        let c = parse("[lab]\ncenters = [[0,0,0,0],[3,5,3,5]]").unwrap();
        assert!(matches!(c.lab, Some(LabSpec::Bilinear { ref centers, .. }) if centers.len() == 2));
    }

    #[test]
    fn growth_sampling_can_be_disabled() {
        let c = parse("[time]\ngrowth_sample_ratio = false").unwrap();
        assert_eq!(c.run.solver.growth_sample_ratio, None);
    }
}
