// SPDX-License-Identifier: MIT OR Apache-2.0

//! Distribution-free change point detection and time series segment
//! clustering built on the Wasserstein two-sample test.
//!
//! The pipeline has two halves:
//!
//! * **Detection** ([`cpd`]): slide a pair of `β`-sample windows over the
//!   series, score each index with the two-sample statistic, smooth the
//!   score with a matched filter estimated from simulated changes, and keep
//!   strict local maxima above a threshold.
//! * **Clustering** ([`tssc`]): summarize each detected segment as a
//!   boundary-tapered empirical distribution, build an `exp(−W2)` affinity
//!   between segments, and split them into `K` groups with normalized
//!   spectral clustering.
//!
//! ```
//! use w2cpd::cpd::{detect, DetectorConfig};
//! use w2cpd::simgen::{generate, DistSpec, SeriesSpec};
//!
//! let series = generate(&SeriesSpec::new(
//!     vec![(DistSpec::normal(0.0, 1.0), 300), (DistSpec::normal(3.0, 1.0), 300)],
//!     1,
//!     7,
//! ))?;
//! let found = detect(&series, &DetectorConfig::new(50))?;
//! assert!(found.change_points.iter().any(|&t| t.abs_diff(300) <= 10));
//! # Ok::<(), w2cpd::Error>(())
//! ```

#![forbid(unsafe_code)]

pub mod cpd;
pub mod empirical;
mod error;
pub mod eval;
pub mod numeric;
mod series;
pub mod simgen;
pub mod tssc;

pub use error::{Error, Result};
pub use series::{segment_bounds, validate_change_points, TimeSeries};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/two-sample.md")]
    mod two_sample {}
    #[doc = include_str!("../../../book/src/wasserstein.md")]
    mod wasserstein {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/matched-filter.md")]
    mod matched_filter {}
    #[doc = include_str!("../../../book/src/online.md")]
    mod online {}
    #[doc = include_str!("../../../book/src/clustering.md")]
    mod clustering {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
