// SPDX-License-Identifier: MIT OR Apache-2.0

use std::collections::VecDeque;

use super::filter::convolve_at;
use super::window::WindowPair;
use super::{is_peak, DetectorConfig};
use crate::empirical::NULL_MEAN;
use crate::error::{Error, Result};

/// Streaming change point detector.
///
/// Feed samples one at a time with [`step`](Self::step). The statistic at
/// `t` needs the sample at `t + β`, its filtered value needs the raw
/// statistic at `t + β`, and the peak test at `t` needs the filtered value
/// at `t + 1`. With a filter, a change at `t` is therefore confirmed when
/// sample `t + 2β + 1` arrives; without one, at sample `t + β + 1`.
///
/// Every confirmed index is one that [`detect`](super::detect) reports on
/// the complete series. Calling [`finish`](Self::finish) at end of stream
/// resolves the tail (where offline detection pads with the null mean), after
/// which the union of emissions equals the offline result exactly.
#[derive(Debug, Clone)]
pub struct OnlineDetector {
    config: DetectorConfig,
    dim: usize,
    /// The most recent `2β + 2` samples.
    recent: VecDeque<Vec<f64>>,
    seen: usize,
    windows: Option<WindowPair>,
    /// Raw statistic values starting at index `raw_start`.
    raw: VecDeque<f64>,
    raw_start: usize,
    /// Scored values (filtered, or raw without a filter) with their indices;
    /// at most the last three.
    scored: VecDeque<(usize, f64)>,
    next_filtered: usize,
}

impl OnlineDetector {
    pub fn new(config: DetectorConfig, dim: usize) -> Result<Self> {
        config.validate()?;
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        let beta = config.beta;
        Ok(Self {
            config,
            dim,
            recent: VecDeque::with_capacity(2 * beta + 2),
            seen: 0,
            windows: None,
            raw: VecDeque::with_capacity(2 * beta + 2),
            raw_start: beta,
            scored: VecDeque::with_capacity(3),
            next_filtered: beta,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    /// Samples consumed so far.
    pub fn samples_seen(&self) -> usize {
        self.seen
    }

    /// Delay between a change index and the sample that confirms it.
    pub fn confirmation_delay(&self) -> usize {
        match self.config.filter {
            Some(_) => 2 * self.config.beta + 1,
            None => self.config.beta + 1,
        }
    }

    fn sample_at(&self, t: usize) -> &[f64] {
        let oldest = self.seen - self.recent.len();
        &self.recent[t - oldest]
    }

    fn raw_at(&self, t: usize) -> f64 {
        self.raw[t - self.raw_start]
    }

    /// Consumes one sample; returns a change point index once confirmed.
    pub fn step(&mut self, sample: &[f64]) -> Result<Option<usize>> {
        if sample.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: sample.len(),
            });
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        let beta = self.config.beta;
        if self.recent.len() == 2 * beta + 2 {
            self.recent.pop_front();
        }
        self.recent.push_back(sample.to_vec());
        self.seen += 1;
        let newest = self.seen - 1;
        if newest < 2 * beta {
            return Ok(None);
        }

        // raw statistic at t = newest − β
        let t = newest - beta;
        let value = match &mut self.windows {
            None => {
                let pair = WindowPair::init(self.recent.iter().map(Vec::as_slice), beta, self.dim);
                let v = pair.statistic();
                self.windows = Some(pair);
                v
            }
            Some(_) => {
                let leaving = self.sample_at(t - 1 - beta).to_vec();
                let centre_prev = self.sample_at(t - 1).to_vec();
                let centre = self.sample_at(t).to_vec();
                let entering = self.sample_at(newest).to_vec();
                let pair = self.windows.as_mut().expect("windows initialized");
                pair.advance(&leaving, &centre_prev, &centre, &entering);
                pair.statistic()
            }
        };
        self.raw.push_back(value);

        if self.config.filter.is_none() {
            return Ok(self.push_scored(t, value));
        }
        // filtered value at u needs raw up to u + β, which is t now
        if t < self.next_filtered + beta {
            return Ok(None);
        }
        let u = self.next_filtered;
        let f = self.filtered_at(u, None);
        self.next_filtered += 1;
        self.trim_raw();
        Ok(self.push_scored(u, f))
    }

    /// Flushes the stream end and returns the remaining change points.
    pub fn finish(mut self) -> Vec<usize> {
        let beta = self.config.beta;
        let len = self.seen;
        let mut out = Vec::new();
        if len < 2 * beta + 1 || self.config.filter.is_none() {
            return out;
        }
        let last_valid = len - beta - 1;
        while self.next_filtered <= last_valid {
            let u = self.next_filtered;
            let f = self.filtered_at(u, Some(last_valid));
            self.next_filtered += 1;
            out.extend(self.push_scored(u, f));
        }
        out
    }

    fn filtered_at(&self, u: usize, last_valid: Option<usize>) -> f64 {
        let filter = self.config.filter.as_ref().expect("filter present");
        let beta = self.config.beta;
        let padded = |i: isize| {
            if i < beta as isize || last_valid.is_some_and(|l| i > l as isize) {
                NULL_MEAN
            } else {
                self.raw_at(i as usize)
            }
        };
        convolve_at(filter.taps(), beta, u, padded)
    }

    fn trim_raw(&mut self) {
        let keep_from = self.next_filtered.saturating_sub(self.config.beta);
        while self.raw_start < keep_from {
            self.raw.pop_front();
            self.raw_start += 1;
        }
    }

    fn push_scored(&mut self, t: usize, value: f64) -> Option<usize> {
        if self.scored.len() == 3 {
            self.scored.pop_front();
        }
        self.scored.push_back((t, value));
        if self.config.filter.is_none() {
            // raw values only need the trailing window for this rule
            while self.raw.len() > 1 {
                self.raw.pop_front();
                self.raw_start += 1;
            }
        }
        if self.scored.len() < 3 {
            return None;
        }
        let (_, prev) = self.scored[0];
        let (centre_t, centre) = self.scored[1];
        let (_, next) = self.scored[2];
        is_peak(prev, centre, next, self.config.lambda).then_some(centre_t)
    }
}
