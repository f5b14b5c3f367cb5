//! Batch command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or I/O errors, 2 when the
//! pipeline finds no liver. Diagnostics go to standard error only.
//! Each run appends one JSON line to `manifest.jsonl` next to its
//! outputs, recording the command, inputs, resolved configuration,
//! tool version and wall-clock duration.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::evaluation::{evaluate_corpus, CorpusSample};
use crate::filtering::SeShape;
use crate::histogram::{calibrate_thresholds, compute_histogram, ThresholdPair};
use crate::imgio::{
    image_to_mask, make_phantom, mask_to_image, read_pgm_file, write_pgm_file, BinaryMask,
    GrayImage,
};
use crate::pipeline::{
    dump_partial_stages, dump_stages, run_pipeline, PipelineConfig, DEFAULT_S1, DEFAULT_S2,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_LIVER_NOT_FOUND: i32 = 2;

#[derive(Parser)]
#[command(
    name = "liverseg",
    version,
    about = "Liver segmentation for axial CT slices: band thresholding, median filter, \
             greatest connected component, closing, Sobel contour overlay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment one PGM slice and dump the stage images
    Segment(SegmentArgs),
    /// Generate a synthetic phantom slice with ground truth
    Phantom(PhantomArgs),
    /// Run the pipeline over a corpus and score it against expert masks
    Eval(EvalArgs),
    /// Grid-search the threshold band maximizing mean Dice over a corpus
    Calibrate(CalibrateArgs),
    /// Export a slice's intensity histogram as CSV
    Histogram(HistogramArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Square,
    Cross,
}

impl From<ShapeArg> for SeShape {
    fn from(s: ShapeArg) -> SeShape {
        match s {
            ShapeArg::Square => SeShape::Square,
            ShapeArg::Cross => SeShape::Cross,
        }
    }
}

#[derive(Args)]
struct BandFlags {
    /// Lower intensity threshold of the liver band
    #[arg(long)]
    s1: Option<u8>,
    /// Upper intensity threshold of the liver band
    #[arg(long)]
    s2: Option<u8>,
}

#[derive(Args)]
struct StageFlags {
    /// Median filter window side (3, 5, 7 or 9)
    #[arg(long)]
    median: Option<usize>,
    /// Structuring element radius for the closing
    #[arg(long = "se-radius")]
    se_radius: Option<usize>,
    /// Structuring element shape for the closing
    #[arg(long = "se-shape", value_enum)]
    se_shape: Option<ShapeArg>,
    /// Reject components smaller than this fraction of the image area
    #[arg(long = "min-area")]
    min_area: Option<f64>,
    /// key=value configuration file; flags take precedence over it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentArgs {
    /// Input slice (binary PGM)
    input: PathBuf,
    #[command(flatten)]
    band: BandFlags,
    #[command(flatten)]
    stage: StageFlags,
    /// Directory receiving the stage dump and result.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PhantomArgs {
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 512)]
    height: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Gaussian noise standard deviation
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = DEFAULT_S1)]
    s1: u8,
    #[arg(long, default_value_t = DEFAULT_S2)]
    s2: u8,
    /// Output prefix: writes PREFIX.pgm and PREFIX_truth.pgm
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of NAME.pgm / NAME_truth.pgm pairs
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    band: BandFlags,
    #[command(flatten)]
    stage: StageFlags,
    /// Directory receiving report.csv and report.json
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Directory of NAME.pgm / NAME_truth.pgm pairs
    #[arg(long)]
    corpus: PathBuf,
    /// Grid stride over intensities
    #[arg(long, default_value_t = 5)]
    step: usize,
    #[command(flatten)]
    stage: StageFlags,
    /// Output config file receiving s1, s2 and mean_dice
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HistogramArgs {
    /// Input slice (binary PGM)
    input: PathBuf,
    /// Output CSV path (256 rows of "intensity,count")
    #[arg(long)]
    out: PathBuf,
}

/// Parses arguments, dispatches, and maps errors onto the exit-code
/// contract.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Segment(args) => cmd_segment(&args),
        Command::Phantom(args) => cmd_phantom(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::Calibrate(args) => cmd_calibrate(&args),
        Command::Histogram(args) => cmd_histogram(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}

#[derive(Default)]
struct FileConfig {
    s1: Option<u8>,
    s2: Option<u8>,
    median_window: Option<usize>,
    se_shape: Option<SeShape>,
    se_radius: Option<usize>,
    min_area_fraction: Option<f64>,
}

fn parse_config_file(path: &Path) -> Result<FileConfig> {
    fn value_of<T: std::str::FromStr>(path: &Path, key: &str, value: &str) -> Result<T> {
        value.parse().map_err(|_| {
            Error::InvalidParameter(format!(
                "config {}: invalid value {value:?} for key {key}",
                path.display()
            ))
        })
    }

    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = FileConfig::default();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!(
                "config {}: expected key=value, got {line:?}",
                path.display()
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "s1" => out.s1 = Some(value_of(path, key, value)?),
            "s2" => out.s2 = Some(value_of(path, key, value)?),
            "median_window" => out.median_window = Some(value_of(path, key, value)?),
            "se_radius" => out.se_radius = Some(value_of(path, key, value)?),
            "min_area_fraction" => out.min_area_fraction = Some(value_of(path, key, value)?),
            "se_shape" => {
                out.se_shape = Some(match value {
                    "square" => SeShape::Square,
                    "cross" => SeShape::Cross,
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "config {}: se_shape must be square or cross, got {value:?}",
                            path.display()
                        )))
                    }
                })
            }
            // Calibration output files carry their score; it is not a
            // stage parameter.
            "mean_dice" => {}
            other => eprintln!(
                "warning: ignoring unknown config key {other:?} in {}",
                path.display()
            ),
        }
    }
    Ok(out)
}

/// Precedence: flags > config file > built-in defaults.
fn resolve_config(band: Option<&BandFlags>, stage: &StageFlags) -> Result<PipelineConfig> {
    let file = match &stage.config {
        Some(path) => parse_config_file(path)?,
        None => FileConfig::default(),
    };
    let defaults = PipelineConfig::default();
    let s1 = band
        .and_then(|b| b.s1)
        .or(file.s1)
        .unwrap_or(defaults.thresholds.s1());
    let s2 = band
        .and_then(|b| b.s2)
        .or(file.s2)
        .unwrap_or(defaults.thresholds.s2());
    let cfg = PipelineConfig {
        thresholds: ThresholdPair::new(s1, s2)?,
        median_window: stage
            .median
            .or(file.median_window)
            .unwrap_or(defaults.median_window),
        se_shape: stage
            .se_shape
            .map(SeShape::from)
            .or(file.se_shape)
            .unwrap_or(defaults.se_shape),
        se_radius: stage
            .se_radius
            .or(file.se_radius)
            .unwrap_or(defaults.se_radius),
        min_area_fraction: stage
            .min_area
            .or(file.min_area_fraction)
            .unwrap_or(defaults.min_area_fraction),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    inputs: Vec<String>,
    config: serde_json::Value,
    version: &'static str,
    duration_ms: u64,
}

fn append_manifest(
    dir: &Path,
    command: &'static str,
    inputs: Vec<String>,
    config: serde_json::Value,
    started: Instant,
) -> Result<()> {
    let manifest = RunManifest {
        command,
        inputs,
        config,
        version: env!("CARGO_PKG_VERSION"),
        duration_ms: started.elapsed().as_millis() as u64,
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("manifest.jsonl");
    let mut line = serde_json::to_string(&manifest).expect("manifest serializes");
    line.push('\n');
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    file.write_all(line.as_bytes())
        .map_err(|e| Error::io(&path, e))
}

fn cmd_segment(args: &SegmentArgs) -> Result<i32> {
    let started = Instant::now();
    let cfg = resolve_config(Some(&args.band), &args.stage)?;
    let img = read_pgm_file(&args.input)?.to_8bit();
    let config_echo = serde_json::to_value(cfg).expect("config serializes");
    let inputs = vec![args.input.display().to_string()];
    match run_pipeline(&img, &cfg) {
        Ok(result) => {
            dump_stages(&result, &args.out)?;
            append_manifest(&args.out, "segment", inputs, config_echo, started)?;
            Ok(EXIT_OK)
        }
        Err(Error::LiverNotFound { reason, partial }) => {
            dump_partial_stages(&partial, &args.out)?;
            append_manifest(&args.out, "segment", inputs, config_echo, started)?;
            eprintln!(
                "liver not found: {reason} (stages a-c dumped to {})",
                args.out.display()
            );
            Ok(EXIT_LIVER_NOT_FOUND)
        }
        Err(other) => Err(other),
    }
}

fn cmd_phantom(args: &PhantomArgs) -> Result<i32> {
    let started = Instant::now();
    let band = ThresholdPair::new(args.s1, args.s2)?;
    let phantom = make_phantom(args.width, args.height, args.seed, args.sigma, band)?;

    let parent = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;

    let mut image_path = args.out.as_os_str().to_owned();
    image_path.push(".pgm");
    let mut truth_path = args.out.as_os_str().to_owned();
    truth_path.push("_truth.pgm");
    write_pgm_file(&image_path, &phantom.image)?;
    write_pgm_file(&truth_path, &mask_to_image(&phantom.truth))?;

    append_manifest(
        &parent,
        "phantom",
        Vec::new(),
        json!({
            "width": args.width,
            "height": args.height,
            "seed": args.seed,
            "sigma": args.sigma,
            "s1": args.s1,
            "s2": args.s2,
        }),
        started,
    )?;
    Ok(EXIT_OK)
}

/// Finds NAME.pgm / NAME_truth.pgm pairs, sorted by name.
fn discover_pairs(dir: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut pairs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else {
            continue;
        };
        let Some(stem) = name.strip_suffix(".pgm") else {
            continue;
        };
        if stem.ends_with("_truth") {
            continue;
        }
        let truth = dir.join(format!("{stem}_truth.pgm"));
        if truth.is_file() {
            pairs.push((stem.to_string(), entry.path(), truth));
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(pairs)
}

fn load_corpus(dir: &Path) -> Result<Vec<CorpusSample>> {
    discover_pairs(dir)?
        .into_iter()
        .map(|(id, image_path, truth_path)| {
            let image = read_pgm_file(&image_path)?.to_8bit();
            let truth = image_to_mask(&read_pgm_file(&truth_path)?);
            Ok(CorpusSample { id, image, truth })
        })
        .collect()
}

fn cmd_eval(args: &EvalArgs) -> Result<i32> {
    let started = Instant::now();
    let cfg = resolve_config(Some(&args.band), &args.stage)?;
    let pairs = discover_pairs(&args.corpus)?;
    let inputs: Vec<String> = pairs
        .iter()
        .map(|(_, p, _)| p.display().to_string())
        .collect();
    let samples = load_corpus(&args.corpus)?;
    let report = evaluate_corpus(&samples, &cfg)?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let csv_path = args.out.join("report.csv");
    std::fs::write(&csv_path, report.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
    let json_path = args.out.join("report.json");
    std::fs::write(&json_path, report.to_json()).map_err(|e| Error::io(&json_path, e))?;

    append_manifest(
        &args.out,
        "eval",
        inputs,
        serde_json::to_value(cfg).expect("config serializes"),
        started,
    )?;
    println!(
        "mean_dice={:.3} n_failed={}",
        report.aggregate.mean_dice, report.aggregate.n_failed
    );
    Ok(EXIT_OK)
}

fn cmd_calibrate(args: &CalibrateArgs) -> Result<i32> {
    let started = Instant::now();
    let base = resolve_config(None, &args.stage)?;
    let pairs = discover_pairs(&args.corpus)?;
    let inputs: Vec<String> = pairs
        .iter()
        .map(|(_, p, _)| p.display().to_string())
        .collect();
    let samples: Vec<(GrayImage, BinaryMask)> = load_corpus(&args.corpus)?
        .into_iter()
        .map(|s| (s.image, s.truth))
        .collect();

    let (pair, mean_dice) = calibrate_thresholds(&samples, args.step, &base)?;

    let body = format!(
        "s1={}\ns2={}\nmean_dice={:.6}\n",
        pair.s1(),
        pair.s2(),
        mean_dice
    );
    std::fs::write(&args.out, body).map_err(|e| Error::io(&args.out, e))?;

    let manifest_dir = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut config_echo = serde_json::to_value(base).expect("config serializes");
    config_echo["step"] = json!(args.step);
    append_manifest(&manifest_dir, "calibrate", inputs, config_echo, started)?;
    println!("s1={} s2={} mean_dice={mean_dice:.6}", pair.s1(), pair.s2());
    Ok(EXIT_OK)
}

fn cmd_histogram(args: &HistogramArgs) -> Result<i32> {
    let started = Instant::now();
    let img = read_pgm_file(&args.input)?.to_8bit();
    let histogram = compute_histogram(&img);
    std::fs::write(&args.out, histogram.to_csv()).map_err(|e| Error::io(&args.out, e))?;
    let manifest_dir = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    append_manifest(
        &manifest_dir,
        "histogram",
        vec![args.input.display().to_string()],
        json!({}),
        started,
    )?;
    Ok(EXIT_OK)
}
