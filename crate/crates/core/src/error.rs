use thiserror::Error;

use crate::matrix::{CHARPOLY_MAX_DIM, MAX_DIM};

/// Errors produced by the kernel, the domain layer, and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimensions must be within 1x1..={max}x{max}, got {rows}x{cols}", max = MAX_DIM)]
    DimensionsOutOfRange { rows: usize, cols: usize },

    #[error("expected {rows}x{cols} = {expected} entries, got {got}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {left_rows}x{left_cols} is not conformable with {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("singular matrix: pivot {pivot} has magnitude below {tol:e}")]
    Singular { pivot: usize, tol: f64 },

    #[error("two-norm power iteration did not converge within {iters} iterations")]
    PowerIterationDiverged { iters: usize },

    #[error(
        "characteristic polynomial supports up to {max}x{max}, got {n}x{n}",
        max = CHARPOLY_MAX_DIM
    )]
    CharpolyTooLarge { n: usize },

    #[error("entry ({row}, {col}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("column {col} sums to {sum}, expected 1")]
    ColumnSum { col: usize, sum: f64 },

    #[error("probability {value} at index {index} lies outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("belief entries sum to {sum}, expected 1")]
    BeliefSum { sum: f64 },

    #[error("belief has {got} entries, expected {expected}")]
    BeliefLength { expected: usize, got: usize },

    #[error("signal index {signal} out of range for {n_signals} signals")]
    SignalOutOfRange { signal: usize, n_signals: usize },

    #[error("signal {signal} has zero marginal probability; the posterior is undefined")]
    ZeroMarginalSignal { signal: usize },

    #[error("malformed linear program: {reason}")]
    MalformedProgram { reason: String },

    #[error("simplex iteration limit of {max_iters} reached")]
    LpIterationLimit { max_iters: usize },

    #[error("numerically singular basis while pivoting row {row}")]
    SingularBasis { row: usize },

    #[error("invalid campaign config: {reason}")]
    InvalidConfig { reason: String },

    #[error("unsupported matrix convention {found:?}, expected {expected:?}")]
    Convention { expected: String, found: String },
}

pub type Result<T> = std::result::Result<T, Error>;
