//! Frequency boxes `Q ⊂ ℤ²` described in physical frequency units `m/L`, and the
//! projections `Δ_Q`.
//!
//! A box is `{(m,n) : inner ⋚ Max(|m/L - a|, |n/L - b|) ⋚ outer}`. Membership is
//! decided with exact rational arithmetic: `L` is converted to the exact binary
//! rational it represents and the per-axis bounds become integer intervals.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Spectrum;
use crate::grid::TorusGrid;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub radius: BigRational,
    pub inclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreqBox {
    pub center: (BigRational, BigRational),
    pub inner: Option<Bound>,
    pub outer: Bound,
}

/// Closed integer interval `[lo, hi]` (empty when `lo > hi`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Interval {
    lo: i64,
    hi: i64,
}

impl Interval {
    fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn clip_count(&self, lo: i64, hi: i64) -> i64 {
        (self.hi.min(hi) - self.lo.max(lo) + 1).max(0)
    }
}

/// A box resolved against a particular scale `L`: membership is integer interval tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeBox {
    outer: (Interval, Interval),
    // Points inside this rectangle are excluded (the hole of an annulus).
    hole: Option<(Interval, Interval)>,
}

pub fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_i64(v: &BigInt) -> i64 {
    v.to_i64().unwrap_or(if v.is_negative() { i64::MIN / 4 } else { i64::MAX / 4 })
}

fn floor(v: &BigRational) -> BigInt {
    v.numer().div_floor(v.denom())
}

fn ceil(v: &BigRational) -> BigInt {
    -((-v.numer()).div_floor(v.denom()))
}

/// Integers `m` with `|m - c| ≤ r` (inclusive) or `|m - c| < r`.
fn axis_interval(c: &BigRational, r: &BigRational, inclusive: bool) -> Interval {
    let lo = c - r;
    let hi = c + r;
    if inclusive {
        Interval { lo: to_i64(&ceil(&lo)), hi: to_i64(&floor(&hi)) }
    } else {
        Interval { lo: to_i64(&(floor(&lo) + 1)), hi: to_i64(&(ceil(&hi) - 1)) }
    }
}

impl FreqBox {
    fn new(a: BigRational, b: BigRational, inner: Option<Bound>, outer: Bound) -> Result<Self> {
        if outer.radius.is_negative() || inner.as_ref().is_some_and(|i| i.radius.is_negative()) {
            return Err(Error::InvalidParameter("box radii must be nonnegative".into()));
        }
        Ok(Self { center: (a, b), inner, outer })
    }

    /// Dyadic annulus `N ≤ Max(|m/L - a|, |n/L - b|) ≤ 2N` (both ends closed).
    pub fn annulus(a: BigRational, b: BigRational, n: BigRational) -> Result<Self> {
        let two_n = &n * BigRational::from_integer(2.into());
        Self::new(a, b, Some(Bound { radius: n, inclusive: true }), Bound { radius: two_n, inclusive: true })
    }

    /// Half-open shell `N ≤ Max(...) < 2N`; shells for `N = 1, 2, 4, …` are disjoint.
    pub fn shell(a: BigRational, b: BigRational, n: BigRational) -> Result<Self> {
        let two_n = &n * BigRational::from_integer(2.into());
        Self::new(a, b, Some(Bound { radius: n, inclusive: true }), Bound { radius: two_n, inclusive: false })
    }

    /// Cube `Max(|m/L - a|, |n/L - b|) ≤ N`.
    pub fn cube(a: BigRational, b: BigRational, n: BigRational) -> Result<Self> {
        Self::new(a, b, None, Bound { radius: n, inclusive: true })
    }

    /// General box with explicit bounds.
    pub fn with_bounds(a: BigRational, b: BigRational, inner: Option<Bound>, outer: Bound) -> Result<Self> {
        Self::new(a, b, inner, outer)
    }

    /// Low-frequency block `Max(|m/L|, |n/L|) < 1` completing the dyadic shells.
    pub fn low_block() -> Self {
        Self {
            center: (BigRational::zero(), BigRational::zero()),
            inner: None,
            outer: Bound { radius: BigRational::from_integer(1.into()), inclusive: false },
        }
    }

    /// Centered dyadic annulus for a floating dyadic `N`.
    pub fn centered_annulus(n: f64) -> Result<Self> {
        Self::annulus(BigRational::zero(), BigRational::zero(), rational(n))
    }

    pub fn centered_shell(n: f64) -> Result<Self> {
        Self::shell(BigRational::zero(), BigRational::zero(), rational(n))
    }

    pub fn centered_cube(n: f64) -> Result<Self> {
        Self::cube(BigRational::zero(), BigRational::zero(), rational(n))
    }

    /// Resolves the box on the lattice of the torus with scale `l`.
    pub fn resolve(&self, l: f64) -> LatticeBox {
        let lr = rational(l);
        let ca = &self.center.0 * &lr;
        let cb = &self.center.1 * &lr;
        let r_out = &self.outer.radius * &lr;
        let outer = (
            axis_interval(&ca, &r_out, self.outer.inclusive),
            axis_interval(&cb, &r_out, self.outer.inclusive),
        );
        // Max ≥ r (inclusive) excludes the open square Max < r; Max > r excludes the closed one.
        let hole = self.inner.as_ref().map(|inner| {
            let r_in = &inner.radius * &lr;
            let closed_hole = !inner.inclusive;
            (axis_interval(&ca, &r_in, closed_hole), axis_interval(&cb, &r_in, closed_hole))
        });
        LatticeBox { outer, hole }
    }

    pub fn contains(&self, l: f64, m: i64, n: i64) -> bool {
        self.resolve(l).contains(m, n)
    }

    /// Number of points of the box on the full integer lattice.
    pub fn lattice_count(&self, l: f64) -> i64 {
        self.resolve(l).count_within(i64::MIN / 4, i64::MAX / 4, i64::MIN / 4, i64::MAX / 4)
    }

    /// Number of points of the box representable on `grid`.
    pub fn grid_count(&self, grid: &TorusGrid) -> i64 {
        self.resolve(grid.scale()).count_on(grid)
    }
}

impl LatticeBox {
    pub fn contains(&self, m: i64, n: i64) -> bool {
        if !(self.outer.0.contains(m) && self.outer.1.contains(n)) {
            return false;
        }
        match &self.hole {
            Some((hx, hy)) => !(hx.contains(m) && hy.contains(n)),
            None => true,
        }
    }

    fn count_within(&self, xlo: i64, xhi: i64, ylo: i64, yhi: i64) -> i64 {
        let outer = self.outer.0.clip_count(xlo, xhi) * self.outer.1.clip_count(ylo, yhi);
        let hole = match &self.hole {
            Some((hx, hy)) => {
                let ix = Interval { lo: hx.lo.max(self.outer.0.lo), hi: hx.hi.min(self.outer.0.hi) };
                let iy = Interval { lo: hy.lo.max(self.outer.1.lo), hi: hy.hi.min(self.outer.1.hi) };
                ix.clip_count(xlo, xhi) * iy.clip_count(ylo, yhi)
            }
            None => 0,
        };
        outer - hole
    }

    pub fn count_on(&self, grid: &TorusGrid) -> i64 {
        let (hx, hy) = (grid.max_freq_x(), grid.max_freq_y());
        self.count_within(-hx, hx - 1, -hy, hy - 1)
    }

    /// Largest `|m|`, `|n|` reached by the box.
    pub fn extent(&self) -> (i64, i64) {
        (
            self.outer.0.lo.abs().max(self.outer.0.hi.abs()),
            self.outer.1.lo.abs().max(self.outer.1.hi.abs()),
        )
    }
}

/// Result of a projection: the projected spectrum and whether the box missed the grid entirely.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub spectrum: Spectrum,
    pub empty_intersection: bool,
}

/// `Δ_Q u`: keeps the coefficients with `(m, n) ∈ Q`.
pub fn project_box(spec: &Spectrum, qbox: &FreqBox) -> Projection {
    let g = *spec.grid();
    let lb = qbox.resolve(g.scale());
    let empty = lb.count_on(&g) == 0;
    let spectrum = spec.map_multiplier(|m, n| {
        if lb.contains(m, n) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    if empty {
        log::warn!("frequency box does not meet the representable lattice; projection is zero");
    }
    Projection { spectrum, empty_intersection: empty }
}

/// Dyadic shells `N = 1, 2, 4, …` up to the grid extent, preceded by the low block.
pub fn dyadic_partition(grid: &TorusGrid) -> Vec<FreqBox> {
    let mut boxes = vec![FreqBox::low_block()];
    let top = (grid.max_freq_x().max(grid.max_freq_y()) as f64) / grid.scale();
    let mut n = 1.0;
    while n <= top {
        boxes.push(FreqBox::centered_shell(n).expect("positive radius"));
        n *= 2.0;
    }
    boxes
}

/// Converts an integer-valued physical center `(a, b)` into box coordinates.
pub fn center(a: i64, b: i64) -> (BigRational, BigRational) {
    (BigRational::from_i64(a).unwrap(), BigRational::from_i64(b).unwrap())
}
