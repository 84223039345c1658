use thiserror::Error;

/// Errors raised by the field, control, integration and restoration layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdlsError {
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("condition selects no components")]
    EmptyCondition,

    #[error("unknown label `{0}` in condition")]
    UnknownLabel(String),

    #[error("degenerate posterior at terminal time")]
    DegeneratePosterior,

    #[error("terminal-time singularity at t = {t}")]
    TerminalSingularity { t: f64 },

    #[error("conditional field singular at t = {t}")]
    ConditionalSingular { t: f64 },

    #[error("time out of range: {t}")]
    TimeOutOfRange { t: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("drift diverged at step {step}")]
    DriftDiverged { step: usize },

    #[error("index {index} out of range for grid with {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("zero-length time interval")]
    ZeroLengthInterval,

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("factor must divide dimensions ({width}x{height} by {factor})")]
    FactorMustDivide { width: usize, height: usize, factor: usize },

    #[error("image {width}x{height} smaller than the {window}x{window} window")]
    ImageTooSmall { width: usize, height: usize, window: usize },

    #[error("mixture has unlabeled components")]
    Unlabeled,

    #[error("mask coverage {target} unreachable after {iterations} strokes")]
    CoverageUnreachable { target: f64, iterations: usize },

    #[error("malformed descriptor `{0}`")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, PdlsError>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(PdlsError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(PdlsError::InvalidParameter {
            name,
            reason: format!("{value} is outside [0, 1]"),
        });
    }
    Ok(())
}
