//! Pseudospectral simulation and numerical probes for the hyperbolic-elliptic
//! Davey–Stewartson system
//!
//! ```text
//! i ∂_t u + P u = -|u|² u - E(|u|²) u,    P = -∂²_x + ∂²_y,
//! Ê(f)(m,n) = 2m² / (m² + n²) f̂(m,n),     Ê(f)(0,0) = 0,
//! ```
//!
//! posed on the rescaled torus `T²_L = ℝ² / 2πLℤ²`.
//!
//! * [`grid`], [`field`], [`operators`], [`norms`], [`freqbox`]: the spectral substrate.
//! * [`evolution`]: Strang-split time stepping, diagnostics, blow-up detection, rate fits and rescaling.
//! * [`exact`]: closed-form solutions used as oracles.
//! * [`strichartz`]: space-time spectra, Bourgain norms and estimate probes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod exact;
pub mod fft;
pub mod field;
pub mod freqbox;
pub mod grid;
pub mod norms;
pub mod operators;
pub mod quadrature;
pub mod strichartz;

pub use error::{Error, Result};
pub use field::{inverse_transform, transform, Field, Spectrum};
pub use freqbox::{project_box, FreqBox, Projection};
pub use grid::TorusGrid;
pub use norms::{hs_norm, hs_seminorm, lp_norm, Lp};
pub use operators::{apply_e, apply_p, nonlinear_term, propagate_linear, solve_phi};
