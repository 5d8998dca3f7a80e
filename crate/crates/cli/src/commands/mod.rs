//! Subcommand implementations. Each writes into its own output directory and finishes with
//! the manifest.

mod exact;
mod fit;
mod run;
mod strichartz;
mod sweep;

use std::path::{Path, PathBuf};

pub use exact::{exact, ExactArgs, ExactCase};
pub use fit::{fit, FitArgs};
pub use run::{run, RunArgs};
pub use strichartz::strichartz;
pub use sweep::sweep;

use crate::config::{parse_config, LoadedConfig, Overrides, ENV_PREFIX};
use crate::error::{CliError, CliResult};

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Global {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// A loaded configuration together with the raw bytes hashed into the manifest.
pub struct Context {
    pub config: LoadedConfig,
    pub inputs: Vec<u8>,
}

impl Global {
    /// Reads the config file (or an empty one), applies `DSTORUS_*` variables and flags.
    pub fn load(&self) -> CliResult<Context> {
        let text = match &self.config {
            Some(p) => std::fs::read_to_string(p).map_err(CliError::io(p))?,
            None => String::new(),
        };
        let env: Vec<(String, String)> = std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        let overrides = Overrides { env: env.clone(), seed: self.seed, threads: self.threads };
        let config = parse_config(&text, &overrides)?;
        let mut inputs = text.into_bytes();
        for (k, v) in env {
            inputs.extend(format!("\n{k}={v}").bytes());
        }
        inputs.extend(format!("\nseed={:?}\nthreads={:?}", config.seed, config.threads).bytes());
        Ok(Context { config, inputs })
    }

    pub fn out_dir(&self) -> CliResult<&Path> {
        self.out.as_deref().ok_or_else(|| CliError::Usage("this command writes files; pass --out DIR".into()))
    }
}
