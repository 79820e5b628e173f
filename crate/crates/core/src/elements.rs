//! Exact action of each optical element on a single LG mode.
//!
//! Every element here is diagonal in the LG basis, except the beamsplitter,
//! which mixes the two interferometer arms and leaves the mode alone.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::mode_basis::ModeIndex;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Beam rotator (for example a Dove-prism pair). Positive angles rotate the
/// profile counterclockwise looking along the beam, imprinting `exp(i l angle)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotatorSpec {
    pub angle: f64,
    pub error: f64,
}

impl RotatorSpec {
    pub fn new(angle: f64) -> Self {
        Self { angle, error: 0.0 }
    }

    pub fn effective_angle(&self) -> f64 {
        self.angle + self.error
    }
}

/// Mode-independent phase shifter (e.g. a tilted glass plate).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseShifterSpec {
    pub phase: f64,
    pub error: f64,
}

impl PhaseShifterSpec {
    pub fn new(phase: f64) -> Self {
        Self { phase, error: 0.0 }
    }

    pub fn effective_phase(&self) -> f64 {
        self.phase + self.error
    }
}

/// Fractional Fourier transformer acting as a mode-order phase `N * order_phase`.
///
/// The constant Gouy offset common to all modes is folded into the stage's
/// phase shifter, so only the order-dependent part is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrftSpec {
    pub order_phase: f64,
    pub error: f64,
}

impl FrftSpec {
    pub fn new(order_phase: f64) -> Self {
        Self {
            order_phase,
            error: 0.0,
        }
    }

    pub fn effective_order_phase(&self) -> f64 {
        self.order_phase + self.error
    }
}

pub fn rotator_phase(m: ModeIndex, r: &RotatorSpec) -> Complex64 {
    Complex64::from_polar(1.0, m.l as f64 * r.effective_angle())
}

/// Same phase for every mode; `_m` is accepted only so all elements share a signature.
pub fn phase_shifter_phase(_m: ModeIndex, s: &PhaseShifterSpec) -> Complex64 {
    Complex64::from_polar(1.0, s.effective_phase())
}

pub fn frft_phase(m: ModeIndex, f: &FrftSpec) -> Complex64 {
    Complex64::from_polar(1.0, m.order() as f64 * f.effective_order_phase())
}

/// Symmetric 50/50 beamsplitter with rows `(1, i)/sqrt2` and `(i, 1)/sqrt2`.
pub fn beamsplitter(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    ((a + I * b) * FRAC_1_SQRT_2, (I * a + b) * FRAC_1_SQRT_2)
}
