//! Closed-form solutions used as oracles, their torus samplings and analytic norm curves.

mod hyperbolic;
mod ozawa;
mod sampling;

pub use hyperbolic::{
    growth_curve, growth_curve_scaled, hyperbolic_explicit, hyperbolic_explicit_scaled, hyperbolic_residual,
    sample_hyperbolic, ProfileSpec,
};
pub use ozawa::{
    annulus_hs, ozawa_dt, ozawa_l4_pow4, ozawa_norms, ozawa_v, stationary_profile, AnnulusNorm, OzawaNorms,
    OzawaParams,
};
pub use sampling::{bump, sample_on_torus, Analytic, Cutoff, ResidualReport, Sampled};
