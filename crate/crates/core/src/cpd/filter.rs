// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sliding_statistic, StatTrace};
use crate::empirical::NULL_MEAN;
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::simgen::{DistSpec, SampleStream};

const UNIT_AREA_TOLERANCE: f64 = 1e-9;
const FILE_FORMAT: &str = "w2cpd-matched-filter";
const FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterSource {
    Estimated,
    Loaded,
}

/// Unit-area convolution kernel over offsets `−β..=β`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedFilter {
    taps: Vec<f64>,
    beta: usize,
    gamma: f64,
    ensemble_size: usize,
    change_pairs: Vec<(DistSpec, DistSpec)>,
    seed: u64,
    clamped_taps: usize,
    source: FilterSource,
}

impl MatchedFilter {
    /// Wraps explicit taps; they must already have unit area.
    pub fn from_taps(taps: Vec<f64>, beta: usize) -> Result<Self> {
        let filter = Self {
            taps,
            beta,
            gamma: 1.0,
            ensemble_size: 0,
            change_pairs: Vec::new(),
            seed: 0,
            clamped_taps: 0,
            source: FilterSource::Loaded,
        };
        filter.validate()?;
        Ok(filter)
    }

    fn validate(&self) -> Result<()> {
        if self.beta == 0 {
            return Err(Error::InvalidFilter("beta must be at least 1".into()));
        }
        if self.taps.len() != 2 * self.beta + 1 {
            return Err(Error::InvalidFilter(format!(
                "expected {} taps for beta={}, found {}",
                2 * self.beta + 1,
                self.beta,
                self.taps.len()
            )));
        }
        if self.taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidFilter("non-finite tap".into()));
        }
        let area: f64 = self.taps.iter().sum();
        if (area - 1.0).abs() > UNIT_AREA_TOLERANCE {
            return Err(Error::InvalidFilter(format!(
                "taps sum to {area}, expected 1"
            )));
        }
        Ok(())
    }

    /// Taps indexed by `offset + β`.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at offset `k ∈ [−β, β]`.
    pub fn tap(&self, offset: isize) -> f64 {
        self.taps[(offset + self.beta as isize) as usize]
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    /// Area of the bias-removed, clamped ensemble profile before scaling.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn ensemble_size(&self) -> usize {
        self.ensemble_size
    }

    pub fn change_pairs(&self) -> &[(DistSpec, DistSpec)] {
        &self.change_pairs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of taps that were negative after bias removal and set to zero.
    pub fn clamped_taps(&self) -> usize {
        self.clamped_taps
    }

    pub fn source(&self) -> FilterSource {
        self.source
    }

    /// Offset of the largest tap (first one on ties).
    pub fn peak_offset(&self) -> isize {
        let mut best = 0;
        for (i, &t) in self.taps.iter().enumerate() {
            if t > self.taps[best] {
                best = i;
            }
        }
        best as isize - self.beta as isize
    }

    pub fn to_toml(&self) -> Result<String> {
        let file = FilterFile {
            format: FILE_FORMAT.into(),
            version: FILE_VERSION,
            beta: self.beta,
            gamma: self.gamma,
            ensemble_size: self.ensemble_size,
            seed: self.seed,
            clamped_taps: self.clamped_taps,
            change_pairs: self
                .change_pairs
                .iter()
                .map(|&(before, after)| ChangePair { before, after })
                .collect(),
            taps: self.taps.clone(),
        };
        toml::to_string(&file).map_err(|e| Error::InvalidFilter(e.to_string()))
    }

    /// Parses a filter file; the result is marked [`FilterSource::Loaded`].
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: FilterFile =
            toml::from_str(text).map_err(|e| Error::InvalidFilter(e.message().to_string()))?;
        if file.format != FILE_FORMAT {
            return Err(Error::InvalidFilter(format!(
                "unknown format '{}'",
                file.format
            )));
        }
        if file.version != FILE_VERSION {
            return Err(Error::InvalidFilter(format!(
                "unsupported version {}",
                file.version
            )));
        }
        let filter = Self {
            taps: file.taps,
            beta: file.beta,
            gamma: file.gamma,
            ensemble_size: file.ensemble_size,
            change_pairs: file
                .change_pairs
                .into_iter()
                .map(|p| (p.before, p.after))
                .collect(),
            seed: file.seed,
            clamped_taps: file.clamped_taps,
            source: FilterSource::Loaded,
        };
        filter.validate()?;
        Ok(filter)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let text = self
            .to_toml()
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        std::fs::write(path, text)
    }

    pub fn load(path: &Path) -> std::io::Result<Result<Self>> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_toml(&text))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ChangePair {
    before: DistSpec,
    after: DistSpec,
}

#[derive(Debug, Serialize, Deserialize)]
struct FilterFile {
    format: String,
    version: u32,
    beta: usize,
    gamma: f64,
    ensemble_size: usize,
    seed: u64,
    #[serde(default)]
    clamped_taps: usize,
    #[serde(default)]
    change_pairs: Vec<ChangePair>,
    taps: Vec<f64>,
}

/// Estimates the matched filter from simulated single-change sequences.
///
/// Each member is a `4β + 1` sample sequence that switches from the first to
/// the second distribution of its pair at index `2β`. The statistic at offsets
/// `−β..=β` around the change is averaged over members, then over pairs with
/// equal weight. The null mean is subtracted, negative taps are clamped to
/// zero, and the result is scaled to unit area.
pub fn estimate_matched_filter(
    beta: usize,
    ensemble_size: usize,
    change_pairs: &[(DistSpec, DistSpec)],
    seed: u64,
) -> Result<MatchedFilter> {
    if beta < 2 {
        return Err(Error::InvalidParameter(format!(
            "beta must be at least 2, got {beta}"
        )));
    }
    if ensemble_size == 0 {
        return Err(Error::InvalidParameter(
            "ensemble size must be positive".into(),
        ));
    }
    if change_pairs.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one change pair required".into(),
        ));
    }
    for (a, b) in change_pairs {
        a.validate()?;
        b.validate()?;
    }

    let width = 2 * beta + 1;
    let mut profile = vec![0.0; width];
    for (pair_index, (before, after)) in change_pairs.iter().enumerate() {
        let traces: Vec<Vec<f64>> = (0..ensemble_size)
            .into_par_iter()
            .map(|member| {
                let stream = ((pair_index as u64) << 32) | member as u64;
                aligned_signature(beta, before, after, seed, stream)
            })
            .collect::<Result<_>>()?;
        let mut pair_mean = vec![0.0; width];
        for trace in &traces {
            for (acc, v) in pair_mean.iter_mut().zip(trace) {
                *acc += v;
            }
        }
        for (acc, v) in profile.iter_mut().zip(&pair_mean) {
            *acc += v / ensemble_size as f64;
        }
    }

    for p in &mut profile {
        *p /= change_pairs.len() as f64;
    }
    let (taps, gamma, clamped_taps) = taps_from_profile(&profile)?;

    let filter = MatchedFilter {
        taps,
        beta,
        gamma,
        ensemble_size,
        change_pairs: change_pairs.to_vec(),
        seed,
        clamped_taps,
        source: FilterSource::Estimated,
    };
    filter.validate()?;
    Ok(filter)
}

/// Removes the null-mean bias, clamps negatives and scales to unit area.
fn taps_from_profile(profile: &[f64]) -> Result<(Vec<f64>, f64, usize)> {
    let mut clamped = 0;
    let mut taps: Vec<f64> = profile
        .iter()
        .map(|p| {
            let v = p - NULL_MEAN;
            if v < 0.0 {
                clamped += 1;
                0.0
            } else {
                v
            }
        })
        .collect();
    let gamma: f64 = taps.iter().sum();
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::FilterEstimation);
    }
    for t in &mut taps {
        *t /= gamma;
    }
    Ok((taps, gamma, clamped))
}

fn aligned_signature(
    beta: usize,
    before: &DistSpec,
    after: &DistSpec,
    seed: u64,
    stream: u64,
) -> Result<Vec<f64>> {
    let change = 2 * beta;
    let mut rng = SampleStream::new(seed, stream);
    let mut xs = Vec::with_capacity(4 * beta + 1);
    rng.fill(before, &mut xs, change);
    rng.fill(after, &mut xs, 2 * beta + 1);
    let series = TimeSeries::univariate(&xs)?;
    let trace = sliding_statistic(&series, beta)?;
    Ok(trace.values()[change - beta..=change + beta].to_vec())
}

/// `Σ_k taps[k] · r(t − k)` summed from `k = −β` to `β`.
///
/// `raw` must return the padded raw statistic for any index.
#[inline]
pub(crate) fn convolve_at(taps: &[f64], beta: usize, t: usize, raw: impl Fn(isize) -> f64) -> f64 {
    let mut acc = 0.0;
    for (i, &tap) in taps.iter().enumerate() {
        let k = i as isize - beta as isize;
        acc += tap * raw(t as isize - k);
    }
    acc
}

/// Convolves a raw trace with the matched filter.
///
/// Raw entries outside the valid region are taken as the null mean. The
/// output keeps the input's valid region and is flagged as filtered.
pub fn apply_filter(trace: &StatTrace, filter: &MatchedFilter) -> Result<StatTrace> {
    if trace.is_filtered() {
        return Err(Error::AlreadyFiltered);
    }
    if trace.beta() != filter.beta() {
        return Err(Error::BetaMismatch {
            trace: trace.beta(),
            filter: filter.beta(),
        });
    }
    let valid = trace.valid_range();
    let raw = trace.values();
    let padded = |i: isize| {
        if i >= valid.start as isize && i < valid.end as isize {
            raw[i as usize]
        } else {
            NULL_MEAN
        }
    };
    let mut out = vec![f64::NAN; trace.len()];
    for t in valid.clone() {
        out[t] = convolve_at(filter.taps(), filter.beta(), t, padded);
    }
    StatTrace::new(out, trace.beta(), valid, true)
}
