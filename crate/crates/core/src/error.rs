//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong when simulating or running the protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter {
        field: &'static str,
        reason: &'static str,
    },
    /// The per-beam excess noise is below the difference noise, so the
    /// common-mode variance would be negative.
    DegenerateModel {
        excess_factor: f64,
        difference_noise: f64,
    },
    /// Channel efficiency exceeds the source's baseline efficiency.
    InconsistentChannel { eta: f64, eta0: f64 },
    /// Not enough samples to satisfy the calibration window.
    InsufficientSamples { required: usize, available: usize },
    /// Paired inputs must have equal length.
    LengthMismatch { left: usize, right: usize },
    /// The key has more bits than there are retained measurement outcomes.
    KeyTooLong { key_bits: usize, retained: usize },
    /// The eavesdropping test set resolved to zero indices.
    EmptyTestSet,
    /// The shot-noise reference has zero variance and cannot normalize.
    ZeroVarianceReference,
    /// A message would violate transcript ordering.
    TranscriptOrder(&'static str),
    /// A serialized transcript line could not be parsed.
    MalformedTranscript { line: usize, reason: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { field, reason } => {
                write!(f, "invalid parameter `{field}`: {reason}")
            }
            Error::DegenerateModel {
                excess_factor,
                difference_noise,
            } => write!(
                f,
                "degenerate model: excess factor {excess_factor} is below the \
                 difference noise {difference_noise}"
            ),
            Error::InconsistentChannel { eta, eta0 } => write!(
                f,
                "inconsistent channel: efficiency {eta} exceeds baseline {eta0}"
            ),
            Error::InsufficientSamples {
                required,
                available,
            } => write!(
                f,
                "insufficient samples: need at least {required}, got {available}"
            ),
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::KeyTooLong { key_bits, retained } => write!(
                f,
                "key of {key_bits} bits exceeds {retained} retained outcomes"
            ),
            Error::EmptyTestSet => write!(f, "eavesdropping test set is empty"),
            Error::ZeroVarianceReference => {
                write!(f, "shot-noise reference has zero variance")
            }
            Error::TranscriptOrder(reason) => {
                write!(f, "transcript ordering violation: {reason}")
            }
            Error::MalformedTranscript { line, reason } => {
                write!(f, "malformed transcript line {line}: {reason}")
            }
        }
    }
}

impl core::error::Error for Error {}
