// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};

/// A sampled, possibly multivariate time series with optional ground truth.
///
/// Change points are indices of the first sample of each new segment, so a
/// series with change points `[τ¹, τ²]` has segments `[0, τ¹)`, `[τ¹, τ²)` and
/// `[τ², T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    data: Vec<Vec<f64>>,
    dim: usize,
    labels: Option<Vec<i64>>,
    change_points: Option<Vec<usize>>,
}

impl TimeSeries {
    pub fn new(data: Vec<Vec<f64>>) -> Result<Self> {
        let dim = match data.first() {
            None => return Err(Error::EmptySeries),
            Some(first) => first.len(),
        };
        if dim == 0 {
            return Err(Error::InvalidSeries("samples have zero dimensions".into()));
        }
        for (t, x) in data.iter().enumerate() {
            if x.len() != dim {
                return Err(Error::InvalidSeries(format!(
                    "sample {t} has {} values, expected {dim}",
                    x.len()
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSample);
            }
        }
        Ok(Self {
            data,
            dim,
            labels: None,
            change_points: None,
        })
    }

    /// Scalar series.
    pub fn univariate(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "labels",
                got: labels.len(),
                expected: self.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_change_points(mut self, change_points: Vec<usize>) -> Result<Self> {
        validate_change_points(&change_points, self.len())?;
        self.change_points = Some(change_points);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn sample(&self, t: usize) -> &[f64] {
        &self.data[t]
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn change_points(&self) -> Option<&[usize]> {
        self.change_points.as_deref()
    }

    /// Values of one dimension across time.
    pub fn channel(&self, dim: usize) -> Vec<f64> {
        self.data.iter().map(|x| x[dim]).collect()
    }

    /// First differences `X[t+1] − X[t]`; drops ground truth change points
    /// by shifting them one step left and keeps labels of the later sample.
    pub fn difference(&self) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::InvalidSeries(
                "differencing needs at least two samples".into(),
            ));
        }
        let data = self
            .data
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| b - a).collect())
            .collect();
        let mut out = Self::new(data)?;
        if let Some(labels) = &self.labels {
            out = out.with_labels(labels[1..].to_vec())?;
        }
        if let Some(cps) = &self.change_points {
            let shifted: Vec<usize> = cps
                .iter()
                .filter_map(|&c| c.checked_sub(1))
                .filter(|&c| c > 0 && c < out.len())
                .collect();
            out = out.with_change_points(shifted)?;
        }
        Ok(out)
    }
}

/// Checks that change points are strictly increasing and inside `(0, len)`.
pub fn validate_change_points(change_points: &[usize], len: usize) -> Result<()> {
    let mut last = 0usize;
    for (i, &c) in change_points.iter().enumerate() {
        if c == 0 || c >= len {
            return Err(Error::InvalidSeries(format!(
                "change point {c} outside (0, {len})"
            )));
        }
        if i > 0 && c <= last {
            return Err(Error::InvalidSeries(format!(
                "change points must be strictly increasing; got {last} then {c}"
            )));
        }
        last = c;
    }
    Ok(())
}

/// Half-open `[start, end)` segment bounds induced by change points.
pub fn segment_bounds(change_points: &[usize], len: usize) -> Vec<(usize, usize)> {
    let mut bounds = Vec::with_capacity(change_points.len() + 1);
    let mut start = 0;
    for &c in change_points {
        bounds.push((start, c));
        start = c;
    }
    bounds.push((start, len));
    bounds
}
