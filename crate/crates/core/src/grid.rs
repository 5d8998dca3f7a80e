//! The discretized torus `T²_L = ℝ² / 2πLℤ²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on the square torus of period `2πL` per axis.
///
/// Values are stored row-major with `x` as the slow index: entry `j * ny + k`
/// holds `u(x_j, y_k)` with `x_j = 2πL j / nx`, `y_k = 2πL k / ny`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    scale: f64,
    nx: usize,
    ny: usize,
}

impl TorusGrid {
    pub fn new(scale: f64, nx: usize, ny: usize) -> Result<Self> {
        let mut problems = Vec::new();
        if !(scale.is_finite() && scale > 0.0) {
            problems.push(format!("scale L must be positive and finite, got {scale}"));
        }
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n % 2 != 0 {
                problems.push(format!("{name} = {n} is odd"));
            } else if n < 4 {
                problems.push(format!("{name} = {n} is below the minimum of 4"));
            }
        }
        if problems.is_empty() {
            Ok(Self { scale, nx, ny })
        } else {
            Err(Error::InvalidGrid(problems.join("; ")))
        }
    }

    /// Torus scale `L`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Period `2πL` of each axis.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.scale
    }

    pub fn dx(&self) -> f64 {
        self.period() / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.period() / self.ny as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.dx() * j as f64
    }

    pub fn y(&self, k: usize) -> f64 {
        self.dy() * k as f64
    }

    /// Quadrature weight `(2πL)² / (nx ny)` of one cell.
    pub fn cell_area(&self) -> f64 {
        self.period() * self.period() / (self.nx * self.ny) as f64
    }

    pub fn area(&self) -> f64 {
        self.period() * self.period()
    }

    /// Integer frequency stored at FFT index `i` along x; the Nyquist index maps to `-nx/2`.
    pub fn freq_x(&self, i: usize) -> i64 {
        signed_freq(i, self.nx)
    }

    pub fn freq_y(&self, i: usize) -> i64 {
        signed_freq(i, self.ny)
    }

    /// FFT index of integer frequency `m` along x, if representable.
    pub fn index_x(&self, m: i64) -> Option<usize> {
        freq_index(m, self.nx)
    }

    pub fn index_y(&self, n: i64) -> Option<usize> {
        freq_index(n, self.ny)
    }

    /// Largest representable `|m|` along x (`nx/2`, attained only on the negative side).
    pub fn max_freq_x(&self) -> i64 {
        (self.nx / 2) as i64
    }

    pub fn max_freq_y(&self) -> i64 {
        (self.ny / 2) as i64
    }

    /// Same torus with different resolution.
    pub fn with_resolution(&self, nx: usize, ny: usize) -> Result<Self> {
        Self::new(self.scale, nx, ny)
    }

    /// Same resolution on a torus of another scale.
    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Self::new(scale, self.nx, self.ny)
    }
}

pub(crate) fn signed_freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub(crate) fn freq_index(m: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if m >= -half && m < half {
        Some(if m >= 0 { m as usize } else { (m + n as i64) as usize })
    } else {
        None
    }
}
