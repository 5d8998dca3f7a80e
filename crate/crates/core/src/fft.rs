//! Planned 2-D FFTs over row-major buffers.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unnormalized 2-D transform pair for an `nx × ny` row-major buffer.
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_rows: Arc<dyn Fft<f64>>,
    inv_rows: Arc<dyn Fft<f64>>,
    fwd_cols: Arc<dyn Fft<f64>>,
    inv_cols: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            fwd_rows: planner.plan_fft_forward(ny),
            inv_rows: planner.plan_fft_inverse(ny),
            fwd_cols: planner.plan_fft_forward(nx),
            inv_cols: planner.plan_fft_inverse(nx),
        }
    }

    /// Cached plan for the calling thread.
    pub fn cached(nx: usize, ny: usize) -> Arc<Fft2> {
        thread_local! {
            static PLANS: RefCell<HashMap<(usize, usize), Arc<Fft2>>> = RefCell::new(HashMap::new());
        }
        PLANS.with(|plans| {
            plans
                .borrow_mut()
                .entry((nx, ny))
                .or_insert_with(|| Arc::new(Fft2::new(nx, ny)))
                .clone()
        })
    }

    /// `X[m,n] = Σ x[j,k] e^{-2πi(mj/nx + nk/ny)}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &*self.fwd_rows, &*self.fwd_cols);
    }

    /// `x[j,k] = Σ X[m,n] e^{+2πi(mj/nx + nk/ny)}` (no `1/(nx ny)` factor).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &*self.inv_rows, &*self.inv_cols);
    }

    fn apply(&self, data: &mut [Complex64], rows: &dyn Fft<f64>, cols: &dyn Fft<f64>) {
        assert_eq!(data.len(), self.nx * self.ny, "buffer does not match plan");
        rows.process(data);
        let mut t = transpose(data, self.nx, self.ny);
        cols.process(&mut t);
        let back = transpose(&t, self.ny, self.nx);
        data.copy_from_slice(&back);
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    out[c * rows + r] = data[r * cols + c];
                }
            }
        }
    }
    out
}
