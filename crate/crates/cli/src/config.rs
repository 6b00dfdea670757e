// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run configuration: a TOML file whose keys mirror the command-line flags.
//! Flags given on the command line win over file values.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use w2cpd::empirical::REJECT_THRESHOLD;
use w2cpd::simgen::SeriesSpec;

use crate::error::{CliError, CliResult};
use crate::ingest::ColumnMapping;

pub const DEFAULT_BETA: usize = 50;
pub const DEFAULT_ENSEMBLE: usize = 200;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub beta: Option<usize>,
    pub lambda: Option<f64>,
    #[serde(alias = "K")]
    pub k: Option<usize>,
    pub delta: Option<usize>,
    pub seed: Option<u64>,
    pub ensemble: Option<usize>,
    pub filter: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    #[serde(default)]
    pub columns: ColumnConfig,
    pub series: Option<SeriesSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnConfig {
    pub time: Option<String>,
    pub values: Option<Vec<String>>,
    pub label: Option<String>,
    pub delimiter: Option<String>,
    pub difference: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e.message())))
    }
}

/// Flags shared by the pipeline commands.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Input series (delimited text with a header row).
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, short = 'o')]
    pub output_dir: Option<PathBuf>,
    /// Window size in samples.
    #[arg(long)]
    pub beta: Option<usize>,
    /// Peak threshold.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of segment clusters.
    #[arg(long = "clusters", short = 'k')]
    pub k: Option<usize>,
    /// Change point tolerance in samples.
    #[arg(long)]
    pub delta: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Matched filter file.
    #[arg(long)]
    pub filter: Option<PathBuf>,
    /// Time column name, excluded from the values.
    #[arg(long)]
    pub time_column: Option<String>,
    /// Value column name (repeatable); defaults to every other column.
    #[arg(long = "value-column")]
    pub value_columns: Vec<String>,
    /// Integer ground-truth label column.
    #[arg(long)]
    pub label_column: Option<String>,
    /// Field delimiter (single character, `\t` for tab).
    #[arg(long)]
    pub delimiter: Option<String>,
    /// Replace the series by its first differences.
    #[arg(long)]
    pub difference: bool,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub beta: usize,
    pub lambda: f64,
    pub k: Option<usize>,
    pub delta: Option<usize>,
    pub seed: u64,
    pub ensemble: usize,
    pub filter: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub truth: Option<PathBuf>,
    pub columns: ColumnMapping,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let file = FileConfig::load(args.config.as_deref())?;
        let cols = file.columns;
        let delimiter = parse_delimiter(args.delimiter.as_ref().or(cols.delimiter.as_ref()))?;
        let values = if args.value_columns.is_empty() {
            cols.values
        } else {
            Some(args.value_columns.clone())
        };
        let config = Self {
            beta: args.beta.or(file.beta).unwrap_or(DEFAULT_BETA),
            lambda: args.lambda.or(file.lambda).unwrap_or(REJECT_THRESHOLD),
            k: args.k.or(file.k),
            delta: args.delta.or(file.delta),
            seed: args.seed.or(file.seed).unwrap_or(0),
            ensemble: file.ensemble.unwrap_or(DEFAULT_ENSEMBLE),
            filter: args.filter.clone().or(file.filter),
            input: args.input.clone().or(file.input),
            output_dir: args
                .output_dir
                .clone()
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from(".")),
            truth: file.truth,
            columns: ColumnMapping {
                time: args.time_column.clone().or(cols.time),
                values,
                label: args.label_column.clone().or(cols.label),
                delimiter,
                difference: args.difference || cols.difference.unwrap_or(false),
            },
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> CliResult<()> {
        if self.beta < 2 {
            return Err(CliError::Usage(format!(
                "beta must be at least 2, got {}",
                self.beta
            )));
        }
        if !self.lambda.is_finite() {
            return Err(CliError::Usage("lambda must be finite".into()));
        }
        if self.k == Some(0) {
            return Err(CliError::Usage("K must be at least 1".into()));
        }
        if self.ensemble == 0 {
            return Err(CliError::Usage("ensemble must be at least 1".into()));
        }
        Ok(())
    }

    pub fn input(&self) -> CliResult<&Path> {
        self.input.as_deref().ok_or_else(|| {
            CliError::Usage("no input file given (use --input or `input` in the config)".into())
        })
    }

    pub fn k(&self) -> CliResult<usize> {
        self.k.ok_or_else(|| {
            CliError::Usage("number of clusters not given (use -k or `K` in the config)".into())
        })
    }

    /// Margin for change point matching; defaults to `beta`.
    pub fn delta(&self) -> usize {
        self.delta.unwrap_or(self.beta)
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

pub fn parse_delimiter(raw: Option<&String>) -> CliResult<u8> {
    match raw.map(String::as_str) {
        None => Ok(b','),
        Some("\\t") | Some("\t") | Some("tab") => Ok(b'\t'),
        Some(s) if s.len() == 1 => Ok(s.as_bytes()[0]),
        Some(s) => Err(CliError::Usage(format!(
            "delimiter must be one character, got '{s}'"
        ))),
    }
}

/// Deterministic sub-seed for a named stage (SplitMix64 finalizer).
pub fn sub_seed(seed: u64, stage: u64) -> u64 {
    let mut z = seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
