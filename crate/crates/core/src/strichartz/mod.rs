//! Space-time spectra on `T²_L`, modulation bands, Bourgain norms and numerical probes of
//! Strichartz-type estimates.

pub mod bilinear;
pub mod ensemble;
pub mod spacetime;
pub mod trilinear;

pub use bilinear::*;
pub use ensemble::{complex_gaussian, gaussian_on_box, rng_for, trial_seed};
pub use spacetime::*;
pub use trilinear::*;
