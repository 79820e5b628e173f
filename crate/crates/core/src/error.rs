use thiserror::Error;

/// Errors raised by the mode-space and grid engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("mode truncated: LG(l={l}, p={p}) has boundary power {boundary_power:.3e} (limit {limit:.0e})")]
    ModeTruncated {
        l: i32,
        p: u32,
        boundary_power: f64,
        limit: f64,
    },

    #[error("field geometries differ")]
    GeometryMismatch,

    #[error("invalid stage: k={k} out of range for n={n} (need k < 2^n)")]
    InvalidStage { n: u32, k: u32 },

    #[error("stage exponent n={0} exceeds the supported maximum")]
    StageExponentTooLarge(u32),

    #[error("label {label} is not in the residue class {k} mod 2^{n} handled by this stage")]
    NotInClass { label: i64, n: u32, k: u32 },

    #[error("tree depth {depth} outside supported range 1..={max}")]
    InvalidDepth { depth: u32, max: u32 },

    #[error("no stage at level {n}, residue {k}")]
    NoSuchStage { n: u32, k: u32 },

    #[error("stage kind does not match the tree it is placed in")]
    StageKindMismatch,

    #[error("the grid engine has no fractional Fourier transformer")]
    FrftUnsupported,
}

pub type Result<T> = std::result::Result<T, Error>;
