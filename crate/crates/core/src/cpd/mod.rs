// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sliding-window change statistic, matched filtering and peak picking.
//!
//! The statistic at index `t` compares the `β` samples before `t` with the
//! `β` samples after it. A distribution change leaves a signature about `2β`
//! samples wide, which the matched filter turns into a single smooth bump
//! before local maxima above `λ` are reported.

mod filter;
mod online;
mod window;

use std::ops::Range;

pub use filter::{apply_filter, estimate_matched_filter, FilterSource, MatchedFilter};
pub use online::OnlineDetector;

use crate::empirical::REJECT_THRESHOLD;
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use window::WindowPair;

/// Per-index change statistic `σ[t]`.
///
/// Only indices in [`valid_range`](Self::valid_range) have full windows on
/// both sides; entries outside it are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatTrace {
    values: Vec<f64>,
    valid: Range<usize>,
    beta: usize,
    filtered: bool,
}

impl StatTrace {
    /// Builds a trace from explicit values; entries outside `valid` are
    /// replaced by `NaN`.
    pub fn new(
        mut values: Vec<f64>,
        beta: usize,
        valid: Range<usize>,
        filtered: bool,
    ) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidParameter("beta must be at least 1".into()));
        }
        if valid.end > values.len() || valid.start > valid.end {
            return Err(Error::InvalidParameter(format!(
                "valid range {valid:?} does not fit a trace of length {}",
                values.len()
            )));
        }
        for (t, v) in values.iter_mut().enumerate() {
            if !valid.contains(&t) {
                *v = f64::NAN;
            } else if !v.is_finite() {
                return Err(Error::NonFiniteSample);
            }
        }
        Ok(Self {
            values,
            valid,
            beta,
            filtered,
        })
    }

    /// An unfiltered trace in which every entry is valid.
    pub fn fully_valid(values: Vec<f64>, beta: usize) -> Result<Self> {
        let n = values.len();
        Self::new(values, beta, 0..n, false)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn is_filtered(&self) -> bool {
        self.filtered
    }

    pub fn valid_range(&self) -> Range<usize> {
        self.valid.clone()
    }

    pub fn is_valid(&self, t: usize) -> bool {
        self.valid.contains(&t)
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        self.is_valid(t).then(|| self.values[t])
    }

    /// All entries, `NaN` outside the valid range.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(t, σ[t])` for every valid index.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.valid.clone().map(|t| (t, self.values[t]))
    }
}

/// How per-dimension statistics are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DimensionReduce {
    #[default]
    Mean,
}

/// Parameters of offline and streaming detection.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub beta: usize,
    /// Threshold applied to the scored trace (filtered when a filter is set).
    pub lambda: f64,
    pub filter: Option<MatchedFilter>,
    pub dimension_reduce: DimensionReduce,
}

impl DetectorConfig {
    pub fn new(beta: usize) -> Self {
        Self {
            beta,
            lambda: REJECT_THRESHOLD,
            filter: None,
            dimension_reduce: DimensionReduce::Mean,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_filter(mut self, filter: MatchedFilter) -> Self {
        self.filter = Some(filter);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta < 2 {
            return Err(Error::InvalidParameter(format!(
                "beta must be at least 2, got {}",
                self.beta
            )));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        if let Some(f) = &self.filter {
            if f.beta() != self.beta {
                return Err(Error::BetaMismatch {
                    trace: self.beta,
                    filter: f.beta(),
                });
            }
        }
        Ok(())
    }
}

/// Output of [`detect`].
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub raw: StatTrace,
    /// Present when the configuration carried a matched filter.
    pub filtered: Option<StatTrace>,
    pub change_points: Vec<usize>,
}

impl Detection {
    /// The trace that was thresholded.
    pub fn scored(&self) -> &StatTrace {
        self.filtered.as_ref().unwrap_or(&self.raw)
    }
}

/// Computes `σ[t]` for every `t` in `[β, T − β)`.
///
/// Each dimension is scored separately with the two-sample statistic (before
/// window as the CDF, after window as the quantile function) and the results
/// are averaged.
pub fn sliding_statistic(series: &TimeSeries, beta: usize) -> Result<StatTrace> {
    if beta == 0 {
        return Err(Error::InvalidParameter("beta must be at least 1".into()));
    }
    let len = series.len();
    let needed = 2 * beta + 1;
    if len < needed {
        return Err(Error::SeriesTooShort { len, beta, needed });
    }
    let xs = series.samples();
    let mut values = vec![f64::NAN; len];
    let mut windows = WindowPair::init(xs[..needed].iter().map(Vec::as_slice), beta, series.dim());
    values[beta] = windows.statistic();
    for t in beta + 1..len - beta {
        windows.advance(&xs[t - 1 - beta], &xs[t - 1], &xs[t], &xs[t + beta]);
        values[t] = windows.statistic();
    }
    StatTrace::new(values, beta, beta..len - beta, false)
}

/// Strict local maxima of the trace that exceed `lambda`.
///
/// Both neighbours must be valid entries.
pub fn detect_peaks(trace: &StatTrace, lambda: f64) -> Vec<usize> {
    let valid = trace.valid_range();
    let v = trace.values();
    if valid.len() < 3 {
        return Vec::new();
    }
    (valid.start + 1..valid.end - 1)
        .filter(|&t| is_peak(v[t - 1], v[t], v[t + 1], lambda))
        .collect()
}

#[inline]
pub(crate) fn is_peak(prev: f64, value: f64, next: f64, lambda: f64) -> bool {
    value > prev && value > next && value > lambda
}

/// Offline detection: statistic, optional matched filter, then peaks.
pub fn detect(series: &TimeSeries, config: &DetectorConfig) -> Result<Detection> {
    config.validate()?;
    let raw = sliding_statistic(series, config.beta)?;
    let filtered = match &config.filter {
        Some(f) => Some(apply_filter(&raw, f)?),
        None => None,
    };
    let change_points = detect_peaks(filtered.as_ref().unwrap_or(&raw), config.lambda);
    Ok(Detection {
        raw,
        filtered,
        change_points,
    })
}
