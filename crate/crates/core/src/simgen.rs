// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded synthetic series built from IID Normal and Laplace segments.
//!
//! Every stream is a ChaCha20 generator keyed by `seed` (expanded with
//! `seed_from_u64`) and selected by a 64-bit stream id, so output depends only
//! on `(seed, stream)` and never on generation order. [`generate`] uses stream
//! `(segment << 32) | dimension`.
//!
//! Normal variates come from the Box–Muller transform, Laplace variates from
//! the inverse CDF. Laplace scale `b` means density `∝ exp(−|x − μ|/b)`, so
//! `L(0, 1/√2)` has unit variance.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Laplace,
}

/// A location-scale distribution to draw IID samples from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    pub family: Family,
    pub location: f64,
    pub scale: f64,
}

impl DistSpec {
    pub fn normal(location: f64, scale: f64) -> Self {
        Self {
            family: Family::Normal,
            location,
            scale,
        }
    }

    pub fn laplace(location: f64, scale: f64) -> Self {
        Self {
            family: Family::Laplace,
            location,
            scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.location.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "location must be finite, got {}",
                self.location
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        match self.family {
            Family::Normal => self.scale * self.scale,
            Family::Laplace => 2.0 * self.scale * self.scale,
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.family {
            Family::Normal => "normal",
            Family::Laplace => "laplace",
        };
        write!(f, "{name}:{}:{}", self.location, self.scale)
    }
}

/// Parses `family:location:scale`, e.g. `normal:0:1` or `laplace:0:0.7071`.
impl FromStr for DistSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::InvalidParameter(format!("cannot parse distribution '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let family = match parts[0].to_ascii_lowercase().as_str() {
            "normal" | "n" => Family::Normal,
            "laplace" | "l" => Family::Laplace,
            _ => return Err(bad()),
        };
        let location = parts[1].parse().map_err(|_| bad())?;
        let scale = parts[2].parse().map_err(|_| bad())?;
        let spec = DistSpec {
            family,
            location,
            scale,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// One IID run inside a [`SeriesSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    #[serde(flatten)]
    pub dist: DistSpec,
    pub length: usize,
}

/// Piecewise-IID series description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub segments: Vec<SegmentSpec>,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_dimension() -> usize {
    1
}

impl SeriesSpec {
    pub fn new(segments: Vec<(DistSpec, usize)>, dimension: usize, seed: u64) -> Self {
        Self {
            segments: segments
                .into_iter()
                .map(|(dist, length)| SegmentSpec { dist, length })
                .collect(),
            dimension,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidParameter(
                "series spec has no segments".into(),
            ));
        }
        if self.dimension == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.length == 0 {
                return Err(Error::InvalidParameter(format!(
                    "segment {i} has zero length"
                )));
            }
            seg.dist.validate()?;
        }
        Ok(())
    }
}

/// Uniform and derived variates from one ChaCha20 stream.
#[derive(Debug, Clone)]
pub struct SampleStream {
    rng: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl SampleStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            spare_normal: None,
        }
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    pub fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.open_unit();
        let u2 = self.unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    pub fn standard_laplace(&mut self) -> f64 {
        let u = self.open_unit() - 0.5;
        -u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }

    pub fn draw(&mut self, spec: &DistSpec) -> f64 {
        let z = match spec.family {
            Family::Normal => self.standard_normal(),
            Family::Laplace => self.standard_laplace(),
        };
        spec.location + spec.scale * z
    }

    pub fn fill(&mut self, spec: &DistSpec, out: &mut Vec<f64>, n: usize) {
        out.extend((0..n).map(|_| self.draw(spec)));
    }
}

/// `n` IID draws from `spec`, deterministic in `seed`.
pub fn sample(spec: &DistSpec, n: usize, seed: u64) -> Vec<f64> {
    let mut stream = SampleStream::new(seed, 0);
    let mut out = Vec::with_capacity(n);
    stream.fill(spec, &mut out, n);
    out
}

/// Concatenates the spec's IID segments into a series with ground truth.
///
/// Change points sit at the cumulative segment boundaries; each sample's label
/// is the index of the first segment whose distribution equals its own, so
/// repeated distributions share a label.
pub fn generate(spec: &SeriesSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let total: usize = spec.segments.iter().map(|s| s.length).sum();
    let d = spec.dimension;
    let mut data = vec![vec![0.0; d]; total];
    let mut labels = Vec::with_capacity(total);
    let mut change_points = Vec::with_capacity(spec.segments.len() - 1);

    let mut start = 0usize;
    let mut column = Vec::new();
    for (index, seg) in spec.segments.iter().enumerate() {
        if index > 0 {
            change_points.push(start);
        }
        let label = spec
            .segments
            .iter()
            .position(|other| other.dist == seg.dist)
            .unwrap_or(index) as i64;
        for dim in 0..d {
            let mut stream = SampleStream::new(spec.seed, ((index as u64) << 32) | dim as u64);
            column.clear();
            stream.fill(&seg.dist, &mut column, seg.length);
            for (row, &v) in data[start..].iter_mut().zip(&column) {
                row[dim] = v;
            }
        }
        labels.extend(std::iter::repeat_n(label, seg.length));
        start += seg.length;
    }

    TimeSeries::new(data)?
        .with_labels(labels)?
        .with_change_points(change_points)
}

/// The three change pairs used to estimate the default matched filter:
/// a small mean shift, a small scale change, and a switch to the
/// unit-variance Laplace law.
pub fn default_change_pairs() -> Vec<(DistSpec, DistSpec)> {
    let base = DistSpec::normal(0.0, 1.0);
    vec![
        (base, DistSpec::normal(0.2, 1.0)),
        (base, DistSpec::normal(0.0, 1.2)),
        (base, DistSpec::laplace(0.0, 1.0 / SQRT_2)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn normal_moments() {
        let xs = sample(&DistSpec::normal(0.0, 1.0), 1_000_000, 11);
        let (mean, var) = moments(&xs);
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn laplace_moments() {
        let xs = sample(&DistSpec::laplace(0.0, 1.0 / SQRT_2), 1_000_000, 12);
        let (mean, var) = moments(&xs);
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn same_seed_same_draws() {
        let spec = DistSpec::laplace(1.0, 2.0);
        assert_eq!(sample(&spec, 100, 5), sample(&spec, 100, 5));
        assert_ne!(sample(&spec, 100, 5), sample(&spec, 100, 6));
    }

    #[test]
    fn generate_layout() {
        let a = DistSpec::normal(0.0, 1.0);
        let b = DistSpec::normal(3.0, 1.0);
        let s = generate(&SeriesSpec::new(vec![(a, 100), (b, 50)], 1, 1)).unwrap();
        assert_eq!(s.len(), 150);
        assert_eq!(s.change_points().unwrap(), &[100]);

        let s = generate(&SeriesSpec::new(vec![(a, 10), (b, 10), (a, 10)], 2, 1)).unwrap();
        let labels = s.labels().unwrap();
        assert_eq!(labels[0], labels[25]);
        assert_ne!(labels[0], labels[15]);
        assert_eq!(s.dim(), 2);
        assert_ne!(s.sample(0)[0], s.sample(0)[1]);

        let s = generate(&SeriesSpec::new(vec![(a, 10)], 1, 1)).unwrap();
        assert!(s.change_points().unwrap().is_empty());
    }

    #[test]
    fn generate_rejects_zero_length() {
        let a = DistSpec::normal(0.0, 1.0);
        assert!(generate(&SeriesSpec::new(vec![(a, 0)], 1, 1)).is_err());
        assert!(generate(&SeriesSpec::new(
            vec![(DistSpec::normal(0.0, 0.0), 3)],
            1,
            1
        ))
        .is_err());
    }

    #[test]
    fn parse_dist_spec() {
        let d: DistSpec = "laplace:0:0.5".parse().unwrap();
        assert_eq!(d, DistSpec::laplace(0.0, 0.5));
        assert_eq!(d.to_string().parse::<DistSpec>().unwrap(), d);
        assert!("normal:0".parse::<DistSpec>().is_err());
        assert!("cauchy:0:1".parse::<DistSpec>().is_err());
        assert!("normal:0:-1".parse::<DistSpec>().is_err());
    }
}
