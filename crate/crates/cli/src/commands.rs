// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use w2cpd::cpd::{detect, estimate_matched_filter, DetectorConfig, MatchedFilter};
use w2cpd::eval::{cp_auc, cp_f1, mapped_accuracy, EvalReport};
use w2cpd::simgen::{default_change_pairs, generate, DistSpec, SeriesSpec};
use w2cpd::tssc::cluster_segments;

use crate::config::{sub_seed, CommonArgs, FileConfig, RunConfig, DEFAULT_BETA, DEFAULT_ENSEMBLE};
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_csv, read_indices, read_trace, INVALID};

/// Sub-seed stage for matched filter estimation.
pub const FILTER_STAGE: u64 = 1;
/// Sub-seed stage for spectral clustering.
pub const CLUSTER_STAGE: u64 = 2;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_lines<T: std::fmt::Display>(path: &Path, items: &[T]) -> CliResult<()> {
    let mut w = create(path)?;
    for item in items {
        writeln!(w, "{item}").map_err(|e| CliError::io(path, e))?;
    }
    finish(w, path)
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// TOML run configuration.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<usize>,
    /// Simulated series per change pair.
    #[arg(long)]
    pub ensemble: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Change pair `before,after`, e.g. `normal:0:1,laplace:0:0.7071` (repeatable).
    #[arg(long = "pair")]
    pub pairs: Vec<String>,
    /// Output filter file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn calibrate_filter(args: &CalibrateArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let beta = args.beta.or(file.beta).unwrap_or(DEFAULT_BETA);
    let ensemble = args.ensemble.or(file.ensemble).unwrap_or(DEFAULT_ENSEMBLE);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let pairs = if args.pairs.is_empty() {
        default_change_pairs()
    } else {
        args.pairs
            .iter()
            .map(|p| parse_pair(p))
            .collect::<CliResult<_>>()?
    };
    let out = args.out.clone().unwrap_or_else(|| {
        file.output_dir
            .unwrap_or_else(|| PathBuf::from("."))
            .join("filter.toml")
    });
    let filter = estimate_matched_filter(beta, ensemble, &pairs, sub_seed(seed, FILTER_STAGE))?;
    let mut w = create(&out)?;
    w.write_all(filter.to_toml()?.as_bytes())
        .map_err(|e| CliError::io(&out, e))?;
    finish(w, &out)?;
    let taps = filter.taps();
    println!("beta={}", filter.beta());
    println!("ensemble={}", filter.ensemble_size());
    println!("pairs={}", filter.change_pairs().len());
    println!("gamma={}", filter.gamma());
    println!("tap_sum={}", taps.iter().sum::<f64>());
    println!("peak_offset={}", filter.peak_offset());
    println!("peak_tap={}", filter.tap(filter.peak_offset()));
    println!("edge_taps={},{}", taps[0], taps[taps.len() - 1]);
    println!("clamped_taps={}", filter.clamped_taps());
    println!("written={}", out.display());
    Ok(())
}

fn parse_pair(text: &str) -> CliResult<(DistSpec, DistSpec)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("change pair '{text}' must be 'before,after'")))?;
    Ok((a.parse()?, b.parse()?))
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML run configuration (may hold a `[series]` table).
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Series spec file; overrides the config's `[series]` table.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the spec seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Change point sidecar; defaults to `<out stem>.truth.txt`.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let mut spec: SeriesSpec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e.message())))?
        }
        None => file.series.clone().ok_or_else(|| {
            CliError::Usage("no series spec (use --spec or a [series] table)".into())
        })?,
    };
    if let Some(seed) = args.seed.or(file.seed) {
        spec.seed = seed;
    }
    let out = args.out.clone().unwrap_or_else(|| {
        file.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
            .join("series.csv")
    });
    let truth_out = args.truth_out.clone().unwrap_or_else(|| {
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
        out.with_file_name(format!("{stem}.truth.txt"))
    });

    let series = generate(&spec)?;
    let mut w = csv::Writer::from_writer(create(&out)?);
    let mut header = vec!["t".to_string()];
    if series.dim() == 1 {
        header.push("x".into());
    } else {
        header.extend((0..series.dim()).map(|d| format!("x{d}")));
    }
    header.push("label".into());
    let csv_err = |e: csv::Error| CliError::Data(format!("{}: {e}", out.display()));
    w.write_record(&header).map_err(csv_err)?;
    let labels = series.labels().expect("generated series carry labels");
    for (t, row) in series.samples().iter().enumerate() {
        let mut record = vec![t.to_string()];
        record.extend(row.iter().map(f64::to_string));
        record.push(labels[t].to_string());
        w.write_record(&record).map_err(csv_err)?;
    }
    let inner = w
        .into_inner()
        .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    finish(inner, &out)?;
    let cps = series.change_points().unwrap_or(&[]);
    write_lines(&truth_out, cps)?;
    println!("samples={}", series.len());
    println!("dimension={}", series.dim());
    println!("change_points={}", cps.len());
    println!("written={}", out.display());
    println!("truth={}", truth_out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Estimate a matched filter in process instead of loading one.
    #[arg(long, conflicts_with = "filter")]
    pub auto_filter: bool,
}

pub fn detect_command(args: &DetectArgs) -> CliResult<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    let series = ingest_csv(cfg.input()?, &cfg.columns)?;
    let mut detector = DetectorConfig::new(cfg.beta).with_lambda(cfg.lambda);
    if let Some(path) = &cfg.filter {
        let filter = match MatchedFilter::load(path) {
            Ok(parsed) => parsed.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CliError::Data(format!(
                    "filter file not found: {}",
                    path.display()
                )))
            }
            Err(e) => return Err(CliError::io(path, e)),
        };
        detector = detector.with_filter(filter);
    } else if args.auto_filter {
        let filter = estimate_matched_filter(
            cfg.beta,
            cfg.ensemble,
            &default_change_pairs(),
            sub_seed(cfg.seed, FILTER_STAGE),
        )?;
        detector = detector.with_filter(filter);
    }
    let found = detect(&series, &detector)?;

    let cp_path = cfg.output("change_points.txt");
    write_lines(&cp_path, &found.change_points)?;

    let trace_path = cfg.output("trace.csv");
    let mut w = create(&trace_path)?;
    let io = |e| CliError::io(&trace_path, e);
    writeln!(w, "t,sigma_raw,sigma_filtered").map_err(io)?;
    let cell = |v: Option<f64>| v.map_or_else(|| INVALID.to_string(), |v| v.to_string());
    for t in 0..found.raw.len() {
        let filtered = found.filtered.as_ref().and_then(|f| f.get(t));
        writeln!(w, "{t},{},{}", cell(found.raw.get(t)), cell(filtered)).map_err(io)?;
    }
    finish(w, &trace_path)?;
    println!("change_points={}", found.change_points.len());
    println!("filtered={}", found.filtered.is_some());
    println!("written={}", cp_path.display());
    println!("trace={}", trace_path.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Change points to cluster; defaults to `change_points.txt` in the output directory.
    #[arg(long)]
    pub change_points: Option<PathBuf>,
}

pub fn cluster_command(args: &ClusterArgs) -> CliResult<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    let k = cfg.k()?;
    let series = ingest_csv(cfg.input()?, &cfg.columns)?;
    let cp_path = args
        .change_points
        .clone()
        .unwrap_or_else(|| cfg.output("change_points.txt"));
    let cps = read_indices(&cp_path)?;
    let labeling = cluster_segments(
        &series,
        &cps,
        k,
        cfg.beta,
        sub_seed(cfg.seed, CLUSTER_STAGE),
    )?;

    let seg_path = cfg.output("labels.csv");
    let mut w = create(&seg_path)?;
    let io = |e| CliError::io(&seg_path, e);
    writeln!(w, "segment_index,start,end,label").map_err(io)?;
    for (i, ((start, end), label)) in labeling
        .segments()
        .iter()
        .zip(labeling.labels())
        .enumerate()
    {
        writeln!(w, "{i},{start},{end},{label}").map_err(io)?;
    }
    finish(w, &seg_path)?;

    let sample_path = cfg.output("sample_labels.csv");
    let mut w = create(&sample_path)?;
    let io = |e| CliError::io(&sample_path, e);
    writeln!(w, "t,label").map_err(io)?;
    for (t, label) in labeling.per_sample().iter().enumerate() {
        writeln!(w, "{t},{label}").map_err(io)?;
    }
    finish(w, &sample_path)?;
    println!("segments={}", labeling.labels().len());
    println!("K={k}");
    println!("written={}", seg_path.display());
    println!("sample_labels={}", sample_path.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Detected change points; defaults to `change_points.txt` in the output directory.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// True change points, one per line.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Trace for CP-AUC; defaults to `trace.csv` in the output directory when present.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Per-sample labels; defaults to `sample_labels.csv` in the output directory when present.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

fn existing(explicit: &Option<PathBuf>, fallback: PathBuf) -> Option<PathBuf> {
    explicit
        .clone()
        .or_else(|| fallback.exists().then_some(fallback))
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    let truth_path = args
        .truth
        .clone()
        .or_else(|| cfg.truth.clone())
        .ok_or_else(|| CliError::Usage("no truth file given (use --truth)".into()))?;
    let truth = read_indices(&truth_path)?;
    let pred_path = args
        .predictions
        .clone()
        .unwrap_or_else(|| cfg.output("change_points.txt"));
    let predicted = read_indices(&pred_path)?;
    let delta = cfg.delta();

    let mut report = EvalReport::new(cp_f1(&predicted, &truth, delta), delta);
    report.k = cfg.k;
    report.beta = Some(cfg.beta);
    report.lambda = Some(cfg.lambda);

    if let Some(trace_path) = existing(&args.trace, cfg.output("trace.csv")) {
        let trace = read_trace(&trace_path, cfg.beta)?;
        report.cp_auc = match cp_auc(&trace, &truth, delta) {
            Ok(v) => Some(v),
            Err(w2cpd::Error::DegenerateAuc(_)) => None,
            Err(e) => return Err(e.into()),
        };
    }

    if let (Some(label_path), Some(input)) = (
        existing(&args.labels, cfg.output("sample_labels.csv")),
        cfg.input.as_deref(),
    ) {
        let series = ingest_csv(input, &cfg.columns)?;
        if let Some(truth_labels) = series.labels() {
            let predicted = read_sample_labels(&label_path)?;
            let k = cfg.k.unwrap_or(1);
            report.label_accuracy = Some(mapped_accuracy(&predicted, truth_labels, k)?);
        }
    }

    let text = report.to_string();
    print!("{text}");
    let out = cfg.output("report.txt");
    let mut w = create(&out)?;
    w.write_all(text.as_bytes())
        .map_err(|e| CliError::io(&out, e))?;
    finish(w, &out)
}

fn read_sample_labels(path: &Path) -> CliResult<Vec<usize>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let line = r.position().map_or(0, |p| p.line());
            r.get(1).and_then(|s| s.trim().parse().ok()).ok_or_else(|| {
                CliError::Data(format!("{}: line {line}: expected t,label", path.display()))
            })
        })
        .collect()
}
