//! Physical-space fields and their Fourier coefficients on `T²_L`.
//!
//! Coefficients are taken against the orthonormal basis
//! `e_{m,n}(x,y) = (2πL)^{-1} exp(i(m x + n y)/L)`, i.e. `c(m,n) = ⟨u, e_{m,n}⟩`
//! with the conjugated kernel, so that `Σ|c|² = ‖u‖²_{L²(T²_L)}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::TorusGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

/// Fourier coefficients stored in FFT order (`index 0..nx` maps to `0, 1, …, -1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

fn check_values(grid: &TorusGrid, values: &[Complex64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), got: values.len() });
    }
    if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

impl Field {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        check_values(&grid, &values)?;
        Ok(Self { grid, values })
    }

    /// Builds a field without the finiteness scan; shape is still checked.
    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f(x, y)` at the grid nodes.
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.nx() {
            let x = grid.x(j);
            for k in 0..grid.ny() {
                values.push(f(x, grid.y(k)));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.grid.ny() + k]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Discrete `⟨u, v⟩ = Σ u conj(v) · cell area`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.cell_area())
    }

    pub fn scale(&self, factor: Complex64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|z| z * factor).collect())
    }

    /// Pointwise difference `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Pointwise `|u|²` as a complex field with zero imaginary part.
    pub fn modulus_squared(&self) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect())
    }

    pub fn transform(&self) -> Spectrum {
        transform(self)
    }
}

impl Spectrum {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        check_values(&grid, &coeffs)?;
        Ok(Self { grid, coeffs })
    }

    pub(crate) fn from_raw(grid: TorusGrid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// The basis vector `e_{m,n}` (coefficient 1 at `(m, n)`).
    pub fn basis(grid: TorusGrid, m: i64, n: i64) -> Result<Self> {
        let mut s = Self::zeros(grid);
        s.set(m, n, Complex64::new(1.0, 0.0))?;
        Ok(s)
    }

    /// Builds a spectrum from `f(m, n)` over all representable frequencies.
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(i64, i64) -> Complex64) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(grid.len());
        for i in 0..grid.nx() {
            let m = grid.freq_x(i);
            for k in 0..grid.ny() {
                coeffs.push(f(m, grid.freq_y(k)));
            }
        }
        Self::new(grid, coeffs)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient `c(m, n)`, zero when `(m, n)` is not representable.
    pub fn get(&self, m: i64, n: i64) -> Complex64 {
        match (self.grid.index_x(m), self.grid.index_y(n)) {
            (Some(i), Some(k)) => self.coeffs[i * self.grid.ny() + k],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, m: i64, n: i64, value: Complex64) -> Result<()> {
        match (self.grid.index_x(m), self.grid.index_y(n)) {
            (Some(i), Some(k)) => {
                let ny = self.grid.ny();
                self.coeffs[i * ny + k] = value;
                Ok(())
            }
            _ => Err(Error::InvalidParameter(format!(
                "frequency ({m}, {n}) is not representable on a {}x{} grid",
                self.grid.nx(),
                self.grid.ny()
            ))),
        }
    }

    /// Iterates `((m, n), c(m, n))` in storage order.
    pub fn iter_modes(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        let ny = self.grid.ny();
        self.coeffs.iter().enumerate().map(move |(idx, c)| {
            ((self.grid.freq_x(idx / ny), self.grid.freq_y(idx % ny)), *c)
        })
    }

    /// Applies a real-or-complex diagonal multiplier `c(m,n) ↦ symbol(m,n) c(m,n)`.
    pub fn map_multiplier(&self, symbol: impl Fn(i64, i64) -> Complex64) -> Spectrum {
        let ny = self.grid.ny();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * symbol(self.grid.freq_x(idx / ny), self.grid.freq_y(idx % ny)))
            .collect();
        Spectrum::from_raw(self.grid, coeffs)
    }

    /// `ℓ²` inner product of coefficient vectors.
    pub fn inner(&self, other: &Spectrum) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Spectrum) -> Result<Spectrum> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Spectrum::from_raw(
            self.grid,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Spectrum) -> Result<Spectrum> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Spectrum::from_raw(
            self.grid,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, factor: Complex64) -> Spectrum {
        Spectrum::from_raw(self.grid, self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Largest violation of `c(-m,-n) = conj(c(m,n))`, the signature of a real field.
    pub fn hermitian_defect(&self) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut worst = 0.0_f64;
        for i in 0..nx {
            let ii = (nx - i) % nx;
            for k in 0..ny {
                let kk = (ny - k) % ny;
                let d = (self.coeffs[i * ny + k] - self.coeffs[ii * ny + kk].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Re-expresses the same trigonometric polynomial on a grid of another size.
    ///
    /// Modes that are not representable on the target grid are dropped.
    pub fn resample(&self, nx: usize, ny: usize) -> Result<Spectrum> {
        let target = self.grid.with_resolution(nx, ny)?;
        let mut out = Spectrum::zeros(target);
        for ((m, n), c) in self.iter_modes() {
            if let (Some(i), Some(k)) = (target.index_x(m), target.index_y(n)) {
                out.coeffs[i * ny + k] = c;
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self) -> Field {
        inverse_transform(self)
    }
}

/// Field → coefficients: `c = (2πL)/(nx ny) · FFT(u)`.
pub fn transform(field: &Field) -> Spectrum {
    let g = *field.grid();
    let mut data = field.values().to_vec();
    Fft2::cached(g.nx(), g.ny()).forward(&mut data);
    let factor = 2.0 * PI * g.scale() / g.len() as f64;
    data.iter_mut().for_each(|z| *z *= factor);
    Spectrum::from_raw(g, data)
}

/// Coefficients → field: `u = (2πL)^{-1} · IFFT(c)` (unnormalized inverse).
pub fn inverse_transform(spec: &Spectrum) -> Field {
    let g = *spec.grid();
    let mut data = spec.coeffs().to_vec();
    Fft2::cached(g.nx(), g.ny()).inverse(&mut data);
    let factor = 1.0 / (2.0 * PI * g.scale());
    data.iter_mut().for_each(|z| *z *= factor);
    Field::from_raw(g, data)
}

/// Pointwise value of the basis function `e_{m,n}` on the torus of scale `l`.
pub fn basis_value(l: f64, m: i64, n: i64, x: f64, y: f64) -> Complex64 {
    let phase = (m as f64 * x + n as f64 * y) / l;
    Complex64::from_polar(1.0 / (2.0 * PI * l), phase)
}
