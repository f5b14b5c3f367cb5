//! Classical liver segmentation for axial abdominal CT slices.
//!
//! The pipeline keeps the intensities of the liver's histogram interval
//! (band thresholding), despeckles the mask with a binary median
//! filter, extracts the greatest 4-connected component (the liver is
//! the largest organ in the abdomen), fills holes by morphological
//! closing, and traces the boundary with a Sobel filter, overlaying it
//! in red on the original slice.
//!
//! Since every step is deterministic, the crate ships a seeded phantom
//! generator with exact ground truth, Dice/Jaccard metrics, and a
//! threshold calibration routine, so the whole chain is verifiable
//! end-to-end without clinical data. The `liverseg` binary exposes all
//! of it for batch use.

pub mod cli;
pub mod components;
pub mod contour;
pub mod error;
pub mod evaluation;
pub mod filtering;
pub mod histogram;
pub mod imgio;
pub mod pipeline;
pub mod reference;

pub use error::{Error, Result};
pub use imgio::{BinaryMask, GrayImage};
pub use pipeline::{run_pipeline, PipelineConfig, SegmentationResult};
