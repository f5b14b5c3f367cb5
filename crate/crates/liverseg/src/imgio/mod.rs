//! Core raster types, bit-exact PGM I/O, and the synthetic phantom
//! generator that supplies verifiable test inputs.

use std::fmt;

use crate::error::{Error, Result};

mod pgm;
mod phantom;

pub use pgm::{read_pgm, read_pgm_file, write_pgm, write_pgm_file};
pub use phantom::{make_phantom, Phantom, MIN_PHANTOM_DIM};

/// A 2-D grid of scalar intensities, stored row-major.
///
/// `max_value` is the intensity ceiling declared by the source (255 for
/// 8-bit input); every pixel is guaranteed to be within `0..=max_value`.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    max_value: u16,
    pixels: Vec<u16>,
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("max_value", &self.max_value)
            .finish_non_exhaustive()
    }
}

impl GrayImage {
    /// Builds an image from raw parts, validating every invariant.
    pub fn new(width: usize, height: usize, max_value: u16, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive (got {width}x{height})"
            )));
        }
        if max_value == 0 {
            return Err(Error::InvalidParameter("max_value must be positive".into()));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::InvalidParameter("image dimensions overflow".into()))?;
        if pixels.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "pixel buffer length {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        if let Some(&bad) = pixels.iter().find(|&&p| p > max_value) {
            return Err(Error::InvalidParameter(format!(
                "pixel value {bad} exceeds max_value {max_value}"
            )));
        }
        Ok(GrayImage {
            width,
            height,
            max_value,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    ///
    /// Panics if `f` produces a value above `max_value`.
    pub fn from_fn(
        width: usize,
        height: usize,
        max_value: u16,
        mut f: impl FnMut(usize, usize) -> u16,
    ) -> Self {
        assert!(width > 0 && height > 0, "dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                assert!(v <= max_value, "pixel {v} exceeds max_value {max_value}");
                pixels.push(v);
            }
        }
        GrayImage {
            width,
            height,
            max_value,
            pixels,
        }
    }

    /// A constant image.
    pub fn constant(width: usize, height: usize, max_value: u16, value: u16) -> Self {
        Self::from_fn(width, height, max_value, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_value(&self) -> u16 {
        self.max_value
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    /// Fetch with coordinates clamped to the image domain (replicate
    /// padding).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u16 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    /// Returns `true` when the image already uses the 8-bit ceiling.
    pub fn is_8bit(&self) -> bool {
        self.max_value == 255
    }

    /// Rescales to the fixed 8-bit intensity axis the pipeline operates
    /// on: each pixel maps to `floor(p * 255 / max_value)`. Images that
    /// already have `max_value == 255` are returned unchanged.
    pub fn to_8bit(&self) -> GrayImage {
        if self.is_8bit() {
            return self.clone();
        }
        let max = self.max_value as u32;
        let pixels = self
            .pixels
            .iter()
            .map(|&p| (p as u32 * 255 / max) as u16)
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            max_value: 255,
            pixels,
        }
    }
}

/// A 2-D grid of {background, foreground} bits, stored row-major as
/// bytes restricted to {0, 1}.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("foreground", &self.count_ones())
            .finish_non_exhaustive()
    }
}

impl BinaryMask {
    /// Builds a mask from raw parts, validating every invariant.
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "mask dimensions must be positive (got {width}x{height})"
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::InvalidParameter("mask dimensions overflow".into()))?;
        if bits.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "bit buffer length {} does not match {width}x{height}",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("mask values must be 0 or 1".into()));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    /// An all-background mask.
    pub fn zeros(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "dimensions must be positive");
        BinaryMask {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    /// Builds a mask by evaluating a predicate at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "dimensions must be positive");
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y) as u8);
            }
        }
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y * self.width + x] = value as u8;
    }

    /// Number of foreground pixels.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Pixelwise subset test (same dimensions required).
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .bits
                .iter()
                .zip(&other.bits)
                .all(|(&a, &b)| a == 0 || b == 1)
    }

    pub fn same_dimensions(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Renders a mask as an 8-bit image: foreground becomes white (255),
/// background black (0).
pub fn mask_to_image(mask: &BinaryMask) -> GrayImage {
    GrayImage {
        width: mask.width,
        height: mask.height,
        max_value: 255,
        pixels: mask
            .bits
            .iter()
            .map(|&b| if b != 0 { 255 } else { 0 })
            .collect(),
    }
}

/// Interprets an image as a mask: any nonzero intensity is foreground.
/// Used to load ground-truth masks stored as 0/255 PGM files.
pub fn image_to_mask(img: &GrayImage) -> BinaryMask {
    BinaryMask {
        width: img.width,
        height: img.height,
        bits: img.pixels.iter().map(|&p| (p != 0) as u8).collect(),
    }
}
