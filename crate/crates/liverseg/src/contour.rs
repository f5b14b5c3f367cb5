//! Sobel gradient on the final mask, contour extraction, and
//! superposition of the contour on the original slice.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imgio::{mask_to_image, BinaryMask, GrayImage};

/// Per-pixel gradient magnitudes |Gx| + |Gy|.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradientImage {
    width: usize,
    height: usize,
    magnitudes: Vec<u32>,
}

impl GradientImage {
    pub(crate) fn from_raw(width: usize, height: usize, magnitudes: Vec<u32>) -> Self {
        debug_assert_eq!(magnitudes.len(), width * height);
        GradientImage {
            width,
            height,
            magnitudes,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn magnitudes(&self) -> &[u32] {
        &self.magnitudes
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        debug_assert!(x < self.width && y < self.height);
        self.magnitudes[y * self.width + x]
    }
}

/// RGB rendering of the segmentation: gray everywhere except the
/// contour, which is drawn pure red.
#[derive(Clone, PartialEq, Eq)]
pub struct Overlay {
    width: usize,
    height: usize,
    rgb: Vec<u8>,
}

impl std::fmt::Debug for Overlay {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Overlay")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Overlay {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major 3-byte pixels.
    pub fn rgb(&self) -> &[u8] {
        &self.rgb
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }
}

/// Convolves with the standard 3x3 Sobel pair
/// `Gx = [[-1,0,1],[-2,0,2],[-1,0,1]]`, `Gy = Gx` transposed, using
/// replicate padding, and returns the L1 magnitude |Gx| + |Gy|.
pub fn sobel_magnitude(img: &GrayImage) -> GradientImage {
    let (w, h) = (img.width(), img.height());
    let mut magnitudes = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| img.get_clamped(x + dx, y + dy) as i32;
            let gx = p(1, -1) - p(-1, -1) + 2 * (p(1, 0) - p(-1, 0)) + p(1, 1) - p(-1, 1);
            let gy = p(-1, 1) - p(-1, -1) + 2 * (p(0, 1) - p(0, -1)) + p(1, 1) - p(1, -1);
            magnitudes.push((gx.abs() + gy.abs()) as u32);
        }
    }
    GradientImage::from_raw(w, h, magnitudes)
}

/// One-pixel-wide inner contour of `mask`: the mask is rendered 0/255,
/// run through the Sobel filter, and pixels with nonzero magnitude that
/// are themselves foreground are kept.
pub fn extract_contour(mask: &BinaryMask) -> BinaryMask {
    let gradient = sobel_magnitude(&mask_to_image(mask));
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        mask.get(x, y) && gradient.get(x, y) > 0
    })
}

/// Draws `contour` in pure red over the original slice; every other
/// pixel is the gray source intensity.
pub fn overlay(original: &GrayImage, contour: &BinaryMask) -> Result<Overlay> {
    if original.width() != contour.width() || original.height() != contour.height() {
        return Err(Error::DimensionMismatch(
            original.width(),
            original.height(),
            contour.width(),
            contour.height(),
        ));
    }
    assert!(
        original.is_8bit(),
        "overlay requires an 8-bit original image"
    );
    let mut rgb = Vec::with_capacity(original.width() * original.height() * 3);
    for (&p, &c) in original.pixels().iter().zip(contour.bits()) {
        if c != 0 {
            rgb.extend_from_slice(&[255, 0, 0]);
        } else {
            let g = p as u8;
            rgb.extend_from_slice(&[g, g, g]);
        }
    }
    Ok(Overlay {
        width: original.width(),
        height: original.height(),
        rgb,
    })
}

/// Encodes the overlay as a binary PPM (P6, maxval 255).
pub fn write_ppm(o: &Overlay) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", o.width, o.height);
    let mut out = header.into_bytes();
    out.extend_from_slice(&o.rgb);
    out
}

pub fn write_ppm_file(path: impl AsRef<Path>, o: &Overlay) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_ppm(o)).map_err(|e| Error::io(path, e))
}
