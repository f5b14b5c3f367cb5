//! End-to-end segmentation: orchestrates the stage chain, exposes every
//! intermediate image, and dumps them plus a checksummed result record.
//!
//! Stage order: (a) original, (b) band threshold, (c) median filter,
//! (d) greatest connected component, (e) morphological closing,
//! (f) Sobel contour, (g) red contour overlaid on the original. The
//! liver mask is stage (e); the reported area is the pixel count of
//! stage (d).

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::components::{component_sizes, label_components, largest_component};
use crate::contour::{extract_contour, overlay, write_ppm, Overlay};
use crate::error::{Error, Result};
use crate::filtering::{close, median_filter, SeShape, StructuringElement};
use crate::histogram::{band_threshold, ThresholdPair};
use crate::imgio::{mask_to_image, write_pgm, BinaryMask, GrayImage};

pub const DEFAULT_S1: u8 = 90;
pub const DEFAULT_S2: u8 = 150;
pub const DEFAULT_MEDIAN_WINDOW: usize = 3;
pub const DEFAULT_SE_SHAPE: SeShape = SeShape::Square;
pub const DEFAULT_SE_RADIUS: usize = 2;
pub const DEFAULT_MIN_AREA_FRACTION: f64 = 0.02;

/// Aggregated stage parameters.
///
/// The default thresholds are an uncalibrated placeholder for 8-bit
/// soft-tissue contrast; calibrating against a corpus with ground truth
/// is the supported way to pick them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PipelineConfig {
    #[serde(flatten)]
    pub thresholds: ThresholdPair,
    pub median_window: usize,
    pub se_shape: SeShape,
    pub se_radius: usize,
    /// Fraction of the image area below which the greatest component is
    /// rejected as "no liver" instead of being returned as a speck.
    pub min_area_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            thresholds: ThresholdPair::new(DEFAULT_S1, DEFAULT_S2).expect("defaults are ordered"),
            median_window: DEFAULT_MEDIAN_WINDOW,
            se_shape: DEFAULT_SE_SHAPE,
            se_radius: DEFAULT_SE_RADIUS,
            min_area_fraction: DEFAULT_MIN_AREA_FRACTION,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.median_window, 3 | 5 | 7 | 9) {
            return Err(Error::InvalidWindow(self.median_window));
        }
        if self.se_radius == 0 {
            return Err(Error::InvalidParameter(
                "structuring element radius must be >= 1".into(),
            ));
        }
        if !self.min_area_fraction.is_finite() || !(0.0..1.0).contains(&self.min_area_fraction) {
            return Err(Error::InvalidParameter(format!(
                "min_area_fraction must be in [0, 1) (got {})",
                self.min_area_fraction
            )));
        }
        Ok(())
    }

    fn element(&self) -> Result<StructuringElement> {
        StructuringElement::new(self.se_shape, self.se_radius)
    }
}

/// The stages computed before a liver-not-found failure, kept so they
/// can still be dumped for diagnosis.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialStages {
    pub original: GrayImage,
    pub thresholded: BinaryMask,
    pub median_filtered: BinaryMask,
}

/// All seven stage images of a successful run plus the component area.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentationResult {
    original: GrayImage,
    thresholded: BinaryMask,
    median_filtered: BinaryMask,
    gcc: BinaryMask,
    closed: BinaryMask,
    contour: BinaryMask,
    overlay: Overlay,
    area_pixels: usize,
    config: PipelineConfig,
}

/// Borrowed view of one stage image, for uniform stage iteration.
#[derive(Clone, Copy, Debug)]
pub enum StageImage<'a> {
    Gray(&'a GrayImage),
    Mask(&'a BinaryMask),
    Rgb(&'a Overlay),
}

impl SegmentationResult {
    pub fn original(&self) -> &GrayImage {
        &self.original
    }

    pub fn thresholded(&self) -> &BinaryMask {
        &self.thresholded
    }

    pub fn median_filtered(&self) -> &BinaryMask {
        &self.median_filtered
    }

    pub fn gcc(&self) -> &BinaryMask {
        &self.gcc
    }

    pub fn closed(&self) -> &BinaryMask {
        &self.closed
    }

    pub fn contour(&self) -> &BinaryMask {
        &self.contour
    }

    pub fn overlay(&self) -> &Overlay {
        &self.overlay
    }

    /// The final liver mask: stage (e), the closed greatest component.
    pub fn liver_mask(&self) -> &BinaryMask {
        &self.closed
    }

    /// Pixel count of the greatest connected component (stage d).
    pub fn area_pixels(&self) -> usize {
        self.area_pixels
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// The seven stages in order, with their dump base names.
    pub fn stages(&self) -> [(&'static str, StageImage<'_>); 7] {
        [
            ("stage_a", StageImage::Gray(&self.original)),
            ("stage_b", StageImage::Mask(&self.thresholded)),
            ("stage_c", StageImage::Mask(&self.median_filtered)),
            ("stage_d", StageImage::Mask(&self.gcc)),
            ("stage_e", StageImage::Mask(&self.closed)),
            ("stage_f", StageImage::Mask(&self.contour)),
            ("stage_g", StageImage::Rgb(&self.overlay)),
        ]
    }
}

pub(crate) struct FoundLiver {
    pub gcc: BinaryMask,
    pub area: usize,
    pub closed: BinaryMask,
}

struct CoreOutcome {
    thresholded: BinaryMask,
    median_filtered: BinaryMask,
    outcome: std::result::Result<FoundLiver, String>,
}

fn run_core(img: &GrayImage, cfg: &PipelineConfig) -> Result<CoreOutcome> {
    cfg.validate()?;
    if !img.is_8bit() {
        return Err(Error::InvalidParameter(format!(
            "pipeline input must be 8-bit (max_value {}); rescale first",
            img.max_value()
        )));
    }
    let thresholded = band_threshold(img, cfg.thresholds);
    let median_filtered = median_filter(&thresholded, cfg.median_window)?;
    let (labels, count) = label_components(&median_filtered);
    if count == 0 {
        return Ok(CoreOutcome {
            thresholded,
            median_filtered,
            outcome: Err("no foreground left after median filtering".into()),
        });
    }
    let sizes = component_sizes(&labels);
    let gcc = largest_component(&labels, &sizes)?;
    let area = gcc.count_ones();
    let min_area = cfg.min_area_fraction * (img.width() * img.height()) as f64;
    if (area as f64) < min_area {
        return Ok(CoreOutcome {
            thresholded,
            median_filtered,
            outcome: Err(format!(
                "largest component covers {area} px, below the {:.1}% floor of {} px",
                cfg.min_area_fraction * 100.0,
                min_area.ceil() as usize
            )),
        });
    }
    let closed = close(&gcc, &cfg.element()?);
    Ok(CoreOutcome {
        thresholded,
        median_filtered,
        outcome: Ok(FoundLiver { gcc, area, closed }),
    })
}

/// Stages (b) through (e) only; `None` when no acceptable liver
/// candidate exists. Calibration and corpus evaluation use this to skip
/// the contour/overlay work their scores never look at.
pub(crate) fn run_liver_stage(img: &GrayImage, cfg: &PipelineConfig) -> Result<Option<FoundLiver>> {
    Ok(run_core(img, cfg)?.outcome.ok())
}

/// Runs the full stage chain on an 8-bit slice.
///
/// Fails with [`Error::LiverNotFound`] when the filtered mask is empty
/// or the greatest component falls below the configured area floor; the
/// error carries stages (a)-(c) for diagnosis.
pub fn run_pipeline(img: &GrayImage, cfg: &PipelineConfig) -> Result<SegmentationResult> {
    let core = run_core(img, cfg)?;
    let found = match core.outcome {
        Ok(found) => found,
        Err(reason) => {
            return Err(Error::LiverNotFound {
                reason,
                partial: Box::new(PartialStages {
                    original: img.clone(),
                    thresholded: core.thresholded,
                    median_filtered: core.median_filtered,
                }),
            })
        }
    };
    let contour = extract_contour(&found.closed);
    let overlay = overlay(img, &contour)?;
    Ok(SegmentationResult {
        original: img.clone(),
        thresholded: core.thresholded,
        median_filtered: core.median_filtered,
        gcc: found.gcc,
        closed: found.closed,
        contour,
        overlay,
        area_pixels: found.area,
        config: *cfg,
    })
}

#[derive(Serialize)]
struct StageChecksum {
    name: String,
    crc32: u32,
}

#[derive(Serialize)]
struct ResultRecord<'a> {
    area_pixels: usize,
    config: &'a PipelineConfig,
    stages: Vec<StageChecksum>,
}

fn crc_of(stage: &StageImage<'_>) -> u32 {
    match stage {
        StageImage::Gray(img) => {
            let bytes: Vec<u8> = img.pixels().iter().map(|&p| p as u8).collect();
            crc32fast::hash(&bytes)
        }
        StageImage::Mask(mask) => crc32fast::hash(mask.bits()),
        StageImage::Rgb(overlay) => crc32fast::hash(overlay.rgb()),
    }
}

fn write_stage(dir: &Path, name: &str, stage: &StageImage<'_>) -> Result<PathBuf> {
    let (path, bytes) = match stage {
        StageImage::Gray(img) => (dir.join(format!("{name}.pgm")), write_pgm(img)),
        StageImage::Mask(mask) => (
            dir.join(format!("{name}.pgm")),
            write_pgm(&mask_to_image(mask)),
        ),
        StageImage::Rgb(overlay) => (dir.join(format!("{name}.ppm")), write_ppm(overlay)),
    };
    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `stage_a.pgm` .. `stage_f.pgm`, `stage_g.ppm` and a
/// `result.json` carrying the area, the resolved config and a CRC-32
/// per stage buffer. Returns the stage paths in order. The record is
/// written last, so a failed dump never leaves a checksum file behind.
pub fn dump_stages(result: &SegmentationResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::with_capacity(7);
    let mut checksums = Vec::with_capacity(7);
    for (name, stage) in result.stages() {
        paths.push(write_stage(dir, name, &stage)?);
        checksums.push(StageChecksum {
            name: paths
                .last()
                .unwrap()
                .file_name()
                .unwrap()
                .to_string_lossy()
                .into_owned(),
            crc32: crc_of(&stage),
        });
    }
    let record = ResultRecord {
        area_pixels: result.area_pixels,
        config: &result.config,
        stages: checksums,
    };
    let json_path = dir.join("result.json");
    let mut body = serde_json::to_string_pretty(&record).expect("record serializes");
    body.push('\n');
    std::fs::write(&json_path, body).map_err(|e| Error::io(&json_path, e))?;
    Ok(paths)
}

/// Writes stages (a)-(c) of a failed run for diagnosis. No liver mask
/// and no `result.json` are produced.
pub fn dump_partial_stages(partial: &PartialStages, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stages = [
        ("stage_a", StageImage::Gray(&partial.original)),
        ("stage_b", StageImage::Mask(&partial.thresholded)),
        ("stage_c", StageImage::Mask(&partial.median_filtered)),
    ];
    let mut paths = Vec::with_capacity(3);
    for (name, stage) in stages {
        paths.push(write_stage(dir, name, &stage)?);
    }
    Ok(paths)
}
