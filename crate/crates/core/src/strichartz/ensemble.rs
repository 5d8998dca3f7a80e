use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::Spectrum;
use crate::freqbox::FreqBox;
use crate::grid::TorusGrid;

/// Standard complex Gaussian: real and imaginary parts independent `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Independent standard complex Gaussian coefficients on the modes of `qbox` present on `grid`.
pub fn gaussian_on_box<R: Rng + ?Sized>(grid: TorusGrid, qbox: &FreqBox, rng: &mut R) -> Result<Spectrum> {
    let lb = qbox.resolve(grid.scale());
    if lb.count_on(&grid) == 0 {
        return Err(Error::EmptySupport("frequency box has no lattice points on the grid".into()));
    }
    Spectrum::from_fn(grid, |m, n| if lb.contains(m, n) { complex_gaussian(rng) } else { Complex64::new(0.0, 0.0) })
}

/// Per-trial seed derived from a base seed and a tag (cell coordinates, trial index).
pub fn trial_seed(base: u64, tag: &[u64]) -> u64 {
    // splitmix64 finalizer over the tag words
    let mut z = base;
    for &t in tag {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(t);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

pub fn rng_for(base: u64, tag: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(base, tag))
}
