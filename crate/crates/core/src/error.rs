use thiserror::Error;

use crate::adversary::AttackKind;
use crate::codewords::Variant;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QkdError {
    #[error("qubit count {0} outside supported range 1..=5")]
    InvalidQubitCount(usize),

    #[error("bitstring has length {got}, expected {expected}")]
    BitLength { expected: usize, got: usize },

    #[error("invalid character {0:?} in bitstring")]
    InvalidBitChar(char),

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("control and target (or pair members) coincide at qubit {0}")]
    SameQubit(usize),

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("qubit {0} is not in the requested product state")]
    NotSeparable(usize),

    #[error("invalid noise policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid session configuration: {0}")]
    InvalidConfig(String),

    #[error("expected {expected} quartets, received {got}")]
    QuartetCount { expected: usize, got: usize },

    #[error("attack {attack} is not analysed for the {variant} variant")]
    UnsupportedAttack {
        variant: Variant,
        attack: AttackKind,
    },

    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
}

pub type Result<T, E = QkdError> = std::result::Result<T, E>;
