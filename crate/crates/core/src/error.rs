//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains a non-finite value")]
    NonFiniteInput,

    #[error("input contains a negative value; squared magnitudes must be non-negative")]
    NegativeInput,

    #[error("invalid shape: require M >= N >= 1, got M={m}, N={n}")]
    InvalidShape { m: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate coefficients: required table entry ({p},{q}) vanishes")]
    DegenerateCoefficient { p: usize, q: usize },

    #[error("degenerate state: normalization sum vanishes")]
    DegenerateState,

    #[error("circuit width {circuit} does not match register width {register}")]
    WidthMismatch { circuit: usize, register: usize },

    #[error("memory guard: {qubits} qubits exceeds the {max}-qubit dense-simulation limit")]
    MemoryGuard { qubits: usize, max: usize },

    #[error("dimension guard: subspace dimension {dim} exceeds the limit {max}")]
    DimensionGuard { dim: u64, max: u64 },

    #[error("circuit not supported by the subspace path: {reason}")]
    UnsupportedCircuit { reason: String },

    #[error("coefficient matrix entry ({p},{j}) lies outside the band and must be zero")]
    OutsideBand { p: usize, j: usize },

    #[error("eigensolver failed to converge to the requested residual")]
    EigenFailure,
}
