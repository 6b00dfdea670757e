// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the detection, clustering and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty distribution")]
    EmptyDistribution,
    #[error("negative weight")]
    NegativeWeight,
    #[error("non-finite sample")]
    NonFiniteSample,
    #[error("weights sum to zero")]
    ZeroTotalWeight,
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("quantile level {0} outside (0, 1]")]
    QuantileOutOfRange(f64),
    #[error("two-sample statistic requires uniform samples")]
    NonUniformSamples,
    #[error("series too short for window: {len} samples, need at least {needed} for beta={beta}")]
    SeriesTooShort {
        len: usize,
        beta: usize,
        needed: usize,
    },
    #[error("empty series")]
    EmptySeries,
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("filter estimation failed: no signal above null mean")]
    FilterEstimation,
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("window mismatch: trace beta={trace}, filter beta={filter}")]
    BetaMismatch { trace: usize, filter: usize },
    #[error("trace is already filtered")]
    AlreadyFiltered,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty segment [{start}, {end})")]
    EmptySegment { start: usize, end: usize },
    #[error("requested {k} clusters from {n} items")]
    TooManyClusters { k: usize, n: usize },
    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
    #[error("matrix is not square")]
    NotSquare,
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFiniteEntry(usize, usize),
    #[error("degenerate AUC: {0}")]
    DegenerateAuc(&'static str),
}

impl Error {
    /// True for failures of a numerical kernel rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::FilterEstimation)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
