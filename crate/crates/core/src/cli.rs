//! Command-line surface: `segment`, `eval`, `bench` and `batch`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{best_foreground_iou, BinaryMask, MetricsRecord, Timings};
use crate::io::{load_image, load_mask, save_mask};
use crate::pipeline::{segment_with, RunConfig};
use crate::pixel::{EncoderKind, ImageBuffer};

#[derive(Debug, Parser)]
#[command(name = "seghdc", version, about = "Unsupervised image segmentation with hypervectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one image and write its mask.
    Segment(SegmentArgs),
    /// Score a predicted mask against ground truth.
    Eval(EvalArgs),
    /// Time the pipeline with a fixed number of iterations.
    Bench(BenchArgs),
    /// Segment and score every image in a directory.
    Batch(BatchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Hypervector dimension.
    #[arg(long, default_value_t = 10_000)]
    pub dim: usize,
    /// Fraction of each half the position flips may use.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Position block size.
    #[arg(long, default_value_t = 26)]
    pub beta: usize,
    /// Color flip-expansion factor.
    #[arg(long, default_value_t = 1)]
    pub gamma: usize,
    #[arg(short = 'k', long, default_value_t = 2)]
    pub clusters: usize,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EncoderKind::Manhattan)]
    pub encoder: EncoderKind,
    /// Always run the full number of iterations.
    #[arg(long)]
    pub no_early_stop: bool,
}

impl ConfigArgs {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            dim: self.dim,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            clusters: self.clusters,
            iterations: self.iterations,
            seed: self.seed,
            encoder: self.encoder,
            early_stop: !self.no_early_stop,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Ground-truth mask; any nonzero pixel is foreground.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Directory receiving the mask after every clustering round.
    #[arg(long)]
    pub dump_iterations: Option<PathBuf>,
    /// Metrics JSON destination (stdout when omitted).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Predicted mask written by `segment`.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(short = 'k', long, default_value_t = 2)]
    pub clusters: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Comma-separated dimensions, one record each.
    #[arg(long, value_parser = parse_count_list)]
    pub sweep_dim: Option<CountList>,
    /// Comma-separated iteration counts, one record each.
    #[arg(long, value_parser = parse_count_list)]
    pub sweep_iters: Option<CountList>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    /// Directory of input images.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Directory of ground-truth masks, paired by file stem.
    #[arg(long)]
    pub gt: PathBuf,
    /// Optional directory for predicted masks.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountList(pub Vec<usize>);

/// Parses `a,b,c` into positive integers.
pub fn parse_count_list(s: &str) -> std::result::Result<CountList, String> {
    let values = s
        .split(',')
        .map(|part| {
            let part = part.trim();
            match part.parse::<usize>() {
                Ok(0) => Err("values must be positive".to_string()),
                Ok(v) => Ok(v),
                Err(_) => Err(format!("invalid count {part:?}")),
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(CountList(values))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Segment(args) => run_segment(&args).map(|_| ()),
        Command::Eval(args) => {
            let score = run_eval(&args)?;
            println!("{score:.4}");
            Ok(())
        }
        Command::Bench(args) => run_bench(&args).map(|_| ()),
        Command::Batch(args) => run_batch(&args).map(|_| ()),
    }
}

/// Exit status for a failed command: 2 for I/O and decoding, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        2
    } else {
        1
    }
}

fn load_gt(path: &Path, img: &ImageBuffer) -> Result<BinaryMask> {
    let gt = BinaryMask::from_image(&load_image(path)?);
    if (gt.height(), gt.width()) != (img.height(), img.width()) {
        return Err(Error::ShapeMismatch {
            expected: (img.height(), img.width()),
            actual: (gt.height(), gt.width()),
        });
    }
    Ok(gt)
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("metrics serialize");
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Error::io(p, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn run_segment(args: &SegmentArgs) -> Result<MetricsRecord> {
    let config = args.config.run_config();
    let img = load_image(&args.input)?;
    config.plan_for(&img)?;
    let gt = args.gt.as_deref().map(|p| load_gt(p, &img)).transpose()?;
    if let Some(dir) = &args.dump_iterations {
        create_dir(dir)?;
    }
    let k = config.clusters;
    let seg = segment_with(&img, &config, |round, mask| match &args.dump_iterations {
        Some(dir) => save_mask(mask, k, dir.join(format!("iter_{round:03}.png"))),
        None => Ok(()),
    })?;
    save_mask(&seg.mask, k, &args.output)?;
    let mut record = seg.metrics(&config, gt.as_ref())?;
    record.input = Some(args.input.display().to_string());
    write_json(args.metrics.as_deref(), &record)?;
    Ok(record)
}

pub fn run_eval(args: &EvalArgs) -> Result<f64> {
    let pred = load_mask(&args.input, args.clusters)?;
    let gt = BinaryMask::from_image(&load_image(&args.gt)?);
    Ok(best_foreground_iou(&pred, &gt, args.clusters)?.iou)
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn median_timings(runs: &[Timings]) -> Timings {
    let pick = |f: fn(&Timings) -> f64| median(runs.iter().map(f).collect());
    Timings {
        encode_position: pick(|t| t.encode_position),
        encode_color: pick(|t| t.encode_color),
        produce_pixels: pick(|t| t.produce_pixels),
        cluster: pick(|t| t.cluster),
        total: pick(|t| t.total),
    }
}

/// Fixed-iteration timing runs. One record per (dimension, iterations)
/// point of the sweep; timings are per-stage medians over `repeats`.
pub fn run_bench(args: &BenchArgs) -> Result<Vec<MetricsRecord>> {
    if args.repeats == 0 {
        return Err(Error::config("repeats must be at least 1"));
    }
    let base = RunConfig {
        early_stop: false,
        ..args.config.run_config()
    };
    let img = load_image(&args.input)?;
    let dims = args.sweep_dim.as_ref().map_or(vec![base.dim], |l| l.0.clone());
    let iters = args
        .sweep_iters
        .as_ref()
        .map_or(vec![base.iterations], |l| l.0.clone());
    let points: Vec<RunConfig> = dims
        .iter()
        .flat_map(|&dim| iters.iter().map(move |&iterations| RunConfig { dim, iterations, ..base }))
        .collect();
    for point in &points {
        point.plan_for(&img)?;
    }
    let gt = args.gt.as_deref().map(|p| load_gt(p, &img)).transpose()?;

    let mut records = Vec::with_capacity(points.len());
    for config in &points {
        let mut runs = Vec::with_capacity(args.repeats);
        let mut last = None;
        for _ in 0..args.repeats {
            let seg = segment_with(&img, config, |_, _| Ok(()))?;
            runs.push(seg.timings);
            last = Some(seg);
        }
        let seg = last.expect("repeats >= 1");
        let mut record = seg.metrics(config, gt.as_ref())?;
        record.timings = median_timings(&runs);
        record.input = Some(args.input.display().to_string());
        eprintln!(
            "d={} iterations={} total={:.1}ms cluster={:.1}ms{}",
            config.dim,
            record.iterations_run,
            record.timings.total,
            record.timings.cluster,
            record.iou.map_or(String::new(), |v| format!(" iou={v:.4}"))
        );
        records.push(record);
    }
    write_json(args.metrics.as_deref(), &records)?;
    Ok(records)
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub count: usize,
    pub mean_iou: f64,
    pub unmatched: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    pub images: Vec<MetricsRecord>,
    pub summary: BatchSummary,
}

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "pgm", "ppm", "pnm"];

fn images_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if !path.is_file() || !is_image {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.insert(stem.to_string(), path);
        }
    }
    Ok(out)
}

pub fn run_batch(args: &BatchArgs) -> Result<BatchReport> {
    let config = args.config.run_config();
    let inputs = images_by_stem(&args.input)?;
    let gts = images_by_stem(&args.gt)?;
    let unmatched: Vec<String> = inputs
        .keys()
        .filter(|s| !gts.contains_key(*s))
        .chain(gts.keys().filter(|s| !inputs.contains_key(*s)))
        .cloned()
        .collect();
    for stem in &unmatched {
        eprintln!("warning: no pair for {stem:?}, skipped");
    }
    let matched: Vec<(&String, &PathBuf)> = inputs.iter().filter(|(s, _)| gts.contains_key(*s)).collect();
    if matched.is_empty() {
        return Err(Error::Invalid(format!(
            "no image in {} has a ground-truth mask with the same stem in {}",
            args.input.display(),
            args.gt.display()
        )));
    }
    if let Some(dir) = &args.output {
        create_dir(dir)?;
    }

    let mut images = Vec::with_capacity(matched.len());
    for (stem, path) in matched {
        let img = load_image(path)?;
        let gt = load_gt(&gts[stem], &img)?;
        let seg = segment_with(&img, &config, |_, _| Ok(()))?;
        if let Some(dir) = &args.output {
            save_mask(&seg.mask, config.clusters, dir.join(format!("{stem}.png")))?;
        }
        let mut record = seg.metrics(&config, Some(&gt))?;
        record.input = Some(stem.clone());
        eprintln!("{stem}: iou={:.4}", record.iou.unwrap_or(0.0));
        images.push(record);
    }
    let count = images.len();
    let mean_iou = images.iter().filter_map(|r| r.iou).sum::<f64>() / count as f64;
    let report = BatchReport {
        images,
        summary: BatchSummary {
            count,
            mean_iou,
            unmatched,
        },
    };
    write_json(args.metrics.as_deref(), &report)?;
    Ok(report)
}
