use thiserror::Error;

/// Errors produced by the simulator and the classical post-processing stages.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("bitstring length {got} does not match qubit count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("permutation of length {got} is not a bijection on {expected} elements")]
    NotAPermutation { expected: usize, got: usize },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("{what} must lie in [0, 1], got {value}")]
    InvalidProbability { what: &'static str, value: f64 },

    #[error("{what} must be non-negative, got {value}")]
    NegativeInput { what: &'static str, value: f64 },

    #[error("circuit order n must be at least 2, got {n}")]
    OrderTooSmall { n: usize },

    #[error("{num_qubits} qubits exceeds the {limit}-qubit simulator limit")]
    TooManyQubits { num_qubits: usize, limit: usize },

    #[error("estimate requires at least one accepted shot")]
    NoAcceptedShots,

    #[error("input sequence must not be empty")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:.3e})")]
    RootsDidNotConverge { iterations: usize, residual: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigensolverDidNotConverge { sweeps: usize, off_norm: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
