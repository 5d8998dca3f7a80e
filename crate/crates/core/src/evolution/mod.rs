//! Time integration, diagnostics, blow-up detection, rate fitting and rescaling.

mod config;
mod fit;
mod rescale;
mod run;
mod stepper;

pub use config::SolverConfig;
pub use fit::{fit_power_law, fit_rate, fit_rate_for, PowerLawFit, RateFit};
pub use rescale::{rescale_by, rescale_solution, ScaledState, LAMBDA_RANGE};
pub use run::{
    concentration, detect_blowup, fit_exponents, fit_window, run_simulation, BlowupReport, BlowupStatus, Detection,
    ExponentFit, Sample, Simulation, Trajectory, CONCENTRATION_RADII,
};
pub use stepper::{nonlinear_substep, strang_step, MidStep, Stepper};
