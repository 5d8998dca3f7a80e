//! Binary state snapshots.
//!
//! Layout, all little-endian: `"DSTR"`, `u32` version, `f64` L, `u32` nx, `u32` ny, `f64` t,
//! `u8` sigma flag (1 for +1, 0 for -1), `u8` E flag, then nx·ny `(re, im)` f64 pairs in
//! row-major FFT order.

use std::fs;
use std::path::Path;

use dstorus::{Spectrum, TorusGrid};
use num_complex::Complex64;

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"DSTR";
pub const VERSION: u32 = 1;
const HEADER: usize = 4 + 4 + 8 + 4 + 4 + 8 + 1 + 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub sigma: f64,
    pub e_enabled: bool,
    pub state: Spectrum,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.state.grid();
        let mut out = Vec::with_capacity(HEADER + 16 * g.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&g.scale().to_le_bytes());
        out.extend_from_slice(&(g.nx() as u32).to_le_bytes());
        out.extend_from_slice(&(g.ny() as u32).to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        out.push(u8::from(self.sigma > 0.0));
        out.push(u8::from(self.e_enabled));
        for c in self.state.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < HEADER {
            return Err(format!("file too short for a checkpoint header ({} bytes)", bytes.len()));
        }
        if &bytes[0..4] != MAGIC {
            return Err("not a checkpoint (bad magic bytes)".into());
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(format!("checkpoint format version {version} is not supported (expected {VERSION}); re-run from the initial data"));
        }
        let l = f64_at(8);
        let (nx, ny) = (u32_at(16) as usize, u32_at(20) as usize);
        let t = f64_at(24);
        let sigma = if bytes[32] == 1 { 1.0 } else { -1.0 };
        let e_enabled = bytes[33] == 1;
        let grid = TorusGrid::new(l, nx, ny).map_err(|e| e.to_string())?;
        let expected = HEADER + 16 * grid.len();
        if bytes.len() != expected {
            return Err(format!("payload size {} does not match a {nx}×{ny} grid ({expected} bytes expected)", bytes.len()));
        }
        let coeffs = bytes[HEADER..]
            .chunks_exact(16)
            .map(|c| Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
            .collect();
        let state = Spectrum::new(grid, coeffs).map_err(|e| e.to_string())?;
        Ok(Self { t, sigma, e_enabled, state })
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_bytes()).map_err(CliError::io(path))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(CliError::io(path))?;
        Self::from_bytes(&bytes).map_err(|m| CliError::format(path, m))
    }
}
