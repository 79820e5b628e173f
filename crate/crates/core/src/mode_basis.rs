//! Laguerre-Gaussian mode labels and their waist-plane field samples.
//!
//! All lengths are in units of the beam waist unless a [`BeamGeometry`] says
//! otherwise. Fields are normalised on the grid they are sampled on, so the
//! discrete inner product (not the continuum integral) is the one for which
//! the sampled modes are orthonormal.

use std::f64::consts::SQRT_2;
use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;

/// Boundary power above which [`sample_lg`] refuses to return a mode.
pub const TRUNCATION_LIMIT: f64 = 1e-6;

/// Minimum `extent / waist` accepted by [`BeamGeometry::new`].
pub const DEFAULT_EXTENT_RATIO: f64 = 6.0;

/// Label of a Laguerre-Gaussian mode: OAM index `l` (units of ħ) and radial
/// index `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub l: i32,
    pub p: u32,
}

impl ModeIndex {
    pub const fn new(l: i32, p: u32) -> Self {
        Self { l, p }
    }

    /// Pure OAM mode with no radial nodes.
    pub const fn oam(l: i32) -> Self {
        Self { l, p: 0 }
    }

    /// Mode order `2p + |l|`.
    pub fn order(&self) -> u32 {
        2 * self.p + self.l.unsigned_abs()
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LG(l={}, p={})", self.l, self.p)
    }
}

/// Mode order `2p + |l|` of an LG mode.
pub fn mode_order(m: ModeIndex) -> u32 {
    m.order()
}

/// Square sampling grid centred on the optical axis.
///
/// Samples sit at `(i - N/2 + 1/2) * cell` for `i in 0..N`, so the axis falls
/// between the four central samples and quarter-turn rotations map the grid
/// onto itself exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    waist: f64,
    grid_size: usize,
    extent: f64,
}

impl Default for BeamGeometry {
    fn default() -> Self {
        Self {
            waist: 1.0,
            grid_size: 256,
            extent: 8.0,
        }
    }
}

impl BeamGeometry {
    /// Validates with the default `extent >= 6 * waist` rule.
    pub fn new(waist: f64, grid_size: usize, extent: f64) -> Result<Self> {
        Self::with_extent_ratio(waist, grid_size, extent, DEFAULT_EXTENT_RATIO)
    }

    pub fn with_extent_ratio(
        waist: f64,
        grid_size: usize,
        extent: f64,
        min_ratio: f64,
    ) -> Result<Self> {
        if !(waist.is_finite() && waist > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "waist must be positive, got {waist}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "extent must be positive, got {extent}"
            )));
        }
        if grid_size == 0 || !grid_size.is_multiple_of(2) {
            return Err(Error::InvalidGeometry(format!(
                "grid size must be a positive even number, got {grid_size}"
            )));
        }
        if extent < min_ratio * waist {
            return Err(Error::InvalidGeometry(format!(
                "extent {extent} is smaller than {min_ratio} x waist {waist}"
            )));
        }
        Ok(Self {
            waist,
            grid_size,
            extent,
        })
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn cell_size(&self) -> f64 {
        self.extent / self.grid_size as f64
    }

    pub fn cell_area(&self) -> f64 {
        let d = self.cell_size();
        d * d
    }

    /// Physical coordinate of sample index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.grid_size as f64 / 2.0 + 0.5) * self.cell_size()
    }

    /// Fractional sample index of physical coordinate `x`; inverse of [`coord`](Self::coord).
    pub fn index_of(&self, x: f64) -> f64 {
        x / self.cell_size() + self.grid_size as f64 / 2.0 - 0.5
    }
}

/// Generalised Laguerre polynomial `L_p^alpha(x)` by the three-term recurrence.
pub fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Unnormalised waist-plane LG amplitude at `(x, y)`.
fn lg_amplitude(m: ModeIndex, waist: f64, x: f64, y: f64) -> Complex64 {
    let abs_l = m.l.unsigned_abs();
    let rho2 = (x * x + y * y) / (waist * waist);
    let radial = (SQRT_2 * rho2.sqrt()).powi(abs_l as i32)
        * laguerre(m.p, abs_l as f64, 2.0 * rho2)
        * (-rho2).exp();
    let phi = y.atan2(x);
    Complex64::from_polar(radial, m.l as f64 * phi)
}

/// Samples LG(l, p) on `geometry`, normalised so the discrete power is 1.
///
/// Fails with [`Error::ModeTruncated`] when more than [`TRUNCATION_LIMIT`] of
/// the mode's power falls outside the disc inscribed in the grid; that power
/// would be lost by any rotation that is not a quarter turn.
pub fn sample_lg(m: ModeIndex, geometry: &BeamGeometry) -> Result<Field> {
    let n = geometry.grid_size();
    let radius2 = (geometry.extent() / 2.0).powi(2);
    let mut samples = Array2::zeros((n, n));
    let mut total = 0.0;
    let mut outside = 0.0;
    for ((row, col), s) in samples.indexed_iter_mut() {
        let x = geometry.coord(col);
        let y = geometry.coord(row);
        let a = lg_amplitude(m, geometry.waist(), x, y);
        let pw = a.norm_sqr();
        total += pw;
        if x * x + y * y > radius2 {
            outside += pw;
        }
        *s = a;
    }
    let boundary_power = outside / total;
    if boundary_power.is_nan() || boundary_power > TRUNCATION_LIMIT {
        return Err(Error::ModeTruncated {
            l: m.l,
            p: m.p,
            boundary_power,
            limit: TRUNCATION_LIMIT,
        });
    }
    let scale = 1.0 / (total * geometry.cell_area()).sqrt();
    samples.mapv_inplace(|s| s * scale);
    Field::from_samples(*geometry, samples)
}

/// Discrete inner product `sum conj(a) * b * cell_area`.
pub fn overlap(a: &Field, b: &Field) -> Result<Complex64> {
    if a.geometry() != b.geometry() {
        return Err(Error::GeometryMismatch);
    }
    let sum: Complex64 = a
        .samples()
        .iter()
        .zip(b.samples().iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(sum * a.geometry().cell_area())
}
