//! The modified Mach-Zehnder interferometer: beamsplitter, a rotator arm and
//! a phase-shifter arm, then a second beamsplitter.
//!
//! A stage at level `n` with residue `k` receives modes whose label is
//! `k mod 2^n` and splits them by the next binary digit:
//! `keep` carries `label = k (mod 2^(n+1))`, `offset` carries
//! `label = 2^n + k (mod 2^(n+1))`. The label is the OAM index for rotator
//! stages and the mode order for FRFT stages.
//!
//! With input in port `a`, the output amplitudes are
//! `offset = (e^{i l a} - e^{i k a}) / 2` and `keep = i (e^{i l a} + e^{i k a}) / 2`,
//! so `keep` is the cross port of the second beamsplitter.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::elements::{
    beamsplitter, frft_phase, phase_shifter_phase, rotator_phase, FrftSpec, PhaseShifterSpec,
    RotatorSpec,
};
use crate::error::{Error, Result};
use crate::mode_basis::ModeIndex;

/// Largest modulus exponent a stage may have.
pub const MAX_STAGE_EXPONENT: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageKind {
    /// Beam rotator in the upper arm; sorts by OAM index.
    Oam,
    /// Fractional Fourier transformer in the upper arm; sorts by mode order.
    Frft,
}

impl StageKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StageKind::Oam => "oam",
            StageKind::Frft => "frft",
        }
    }
}

/// The element sitting in the mode-dependent arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmElement {
    Rotator(RotatorSpec),
    Frft(FrftSpec),
}

/// Which output of a stage a mode leaves through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    Keep,
    Offset,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSpec {
    n: u32,
    k: u32,
    arm: ArmElement,
    shifter: PhaseShifterSpec,
}

fn check_indices(n: u32, k: u32) -> Result<()> {
    if n > MAX_STAGE_EXPONENT {
        return Err(Error::StageExponentTooLarge(n));
    }
    if u64::from(k) >= 1u64 << n {
        return Err(Error::InvalidStage { n, k });
    }
    Ok(())
}

/// `pi / 2^n`, the rotation angle (or order phase) of a level-`n` stage.
pub fn level_angle(n: u32) -> f64 {
    PI / (1u64 << n) as f64
}

impl StageSpec {
    /// Error-free OAM stage: rotator at `pi/2^n`, shifter at `k pi/2^n`.
    pub fn oam(n: u32, k: u32) -> Result<Self> {
        check_indices(n, k)?;
        let alpha = level_angle(n);
        Ok(Self {
            n,
            k,
            arm: ArmElement::Rotator(RotatorSpec::new(alpha)),
            shifter: PhaseShifterSpec::new(k as f64 * alpha),
        })
    }

    /// Error-free FRFT stage: order phase `pi/2^n`, shifter at `k pi/2^n`.
    pub fn frft(n: u32, k: u32) -> Result<Self> {
        check_indices(n, k)?;
        let beta = level_angle(n);
        Ok(Self {
            n,
            k,
            arm: ArmElement::Frft(FrftSpec::new(beta)),
            shifter: PhaseShifterSpec::new(k as f64 * beta),
        })
    }

    pub fn new(kind: StageKind, n: u32, k: u32) -> Result<Self> {
        match kind {
            StageKind::Oam => Self::oam(n, k),
            StageKind::Frft => Self::frft(n, k),
        }
    }

    /// Sets the error on the rotator angle (or FRFT order phase).
    pub fn with_arm_error(mut self, error: f64) -> Self {
        match &mut self.arm {
            ArmElement::Rotator(r) => r.error = error,
            ArmElement::Frft(f) => f.error = error,
        }
        self
    }

    pub fn with_phase_error(mut self, error: f64) -> Self {
        self.shifter.error = error;
        self
    }

    /// Overrides the nominal shifter phase (normally `k pi/2^n`).
    pub fn with_shifter_phase(mut self, phase: f64) -> Self {
        self.shifter.phase = phase;
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> i64 {
        1i64 << self.n
    }

    pub fn kind(&self) -> StageKind {
        match self.arm {
            ArmElement::Rotator(_) => StageKind::Oam,
            ArmElement::Frft(_) => StageKind::Frft,
        }
    }

    pub fn arm(&self) -> &ArmElement {
        &self.arm
    }

    pub fn shifter(&self) -> &PhaseShifterSpec {
        &self.shifter
    }

    pub fn arm_error(&self) -> f64 {
        match self.arm {
            ArmElement::Rotator(r) => r.error,
            ArmElement::Frft(f) => f.error,
        }
    }

    pub fn phase_error(&self) -> f64 {
        self.shifter.error
    }

    /// The integer this stage sorts on: `l` for OAM stages, `2p+|l|` for FRFT stages.
    pub fn label(&self, m: ModeIndex) -> i64 {
        match self.kind() {
            StageKind::Oam => m.l as i64,
            StageKind::Frft => m.order() as i64,
        }
    }

    /// Phase picked up in the mode-dependent arm.
    pub fn arm_phase(&self, m: ModeIndex) -> Complex64 {
        match &self.arm {
            ArmElement::Rotator(r) => rotator_phase(m, r),
            ArmElement::Frft(f) => frft_phase(m, f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOutput {
    pub keep_amp: Complex64,
    pub offset_amp: Complex64,
}

impl StageOutput {
    pub fn keep_power(&self) -> f64 {
        self.keep_amp.norm_sqr()
    }

    pub fn offset_power(&self) -> f64 {
        self.offset_amp.norm_sqr()
    }

    pub fn amp(&self, port: Port) -> Complex64 {
        match port {
            Port::Keep => self.keep_amp,
            Port::Offset => self.offset_amp,
        }
    }

    pub fn power(&self, port: Port) -> f64 {
        self.amp(port).norm_sqr()
    }

    /// Port holding the larger share of the power (ties go to `Keep`).
    pub fn bright_port(&self) -> Port {
        if self.offset_power() > self.keep_power() {
            Port::Offset
        } else {
            Port::Keep
        }
    }
}

/// Propagates `input_amp` of mode `m`, entering the first input port, through one stage.
pub fn stage_transfer(m: ModeIndex, s: &StageSpec, input_amp: Complex64) -> StageOutput {
    let (upper, lower) = beamsplitter(input_amp, Complex64::new(0.0, 0.0));
    let upper = upper * s.arm_phase(m);
    let lower = lower * phase_shifter_phase(m, &s.shifter);
    let (c, d) = beamsplitter(upper, lower);
    StageOutput {
        keep_amp: d,
        offset_amp: c,
    }
}

/// Residue-class rule: `Keep` iff `label = k (mod 2^(n+1))`.
///
/// Fails when `label` is not in the class `k mod 2^n` this stage serves.
pub fn branch_predicate(label: i64, s: &StageSpec) -> Result<Port> {
    let k = s.k as i64;
    if label.rem_euclid(s.modulus()) != k {
        return Err(Error::NotInClass {
            label,
            n: s.n,
            k: s.k,
        });
    }
    if label.rem_euclid(2 * s.modulus()) == k {
        Ok(Port::Keep)
    } else {
        Ok(Port::Offset)
    }
}
