//! Mask despeckling and hole filling: binary median filter plus
//! morphological dilation, erosion and closing.
//!
//! Boundary rules: the median filter clamps sample coordinates to the
//! image (replicate padding), while the morphology operators simply
//! ignore structuring-element cells that fall outside the image. The
//! latter keeps `erode(full) == full` and closing extensive at borders.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imgio::BinaryMask;

/// Neighborhood shape slid over the mask by the morphology operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeShape {
    /// Full (2r+1) x (2r+1) block.
    Square,
    /// Plus sign: cells on the same row or column as the origin.
    Cross,
}

/// A structuring element centered on its origin. Both shapes are
/// symmetric under 180-degree rotation, so closing needs no
/// reflection bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    shape: SeShape,
    radius: usize,
}

impl StructuringElement {
    pub fn new(shape: SeShape, radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidParameter(
                "structuring element radius must be >= 1".into(),
            ));
        }
        Ok(StructuringElement { shape, radius })
    }

    pub fn square(radius: usize) -> Result<Self> {
        Self::new(SeShape::Square, radius)
    }

    pub fn cross(radius: usize) -> Result<Self> {
        Self::new(SeShape::Cross, radius)
    }

    pub fn shape(&self) -> SeShape {
        self.shape
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Enumerates the element's cell offsets relative to the origin.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as isize;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let keep = match self.shape {
                    SeShape::Square => true,
                    SeShape::Cross => dx == 0 || dy == 0,
                };
                if keep {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

/// Replaces each pixel by the majority value of the `window` x `window`
/// neighborhood centered on it, with coordinates clamped to the image.
/// The window must be one of 3, 5, 7 or 9.
pub fn median_filter(mask: &BinaryMask, window: usize) -> Result<BinaryMask> {
    if !matches!(window, 3 | 5 | 7 | 9) {
        return Err(Error::InvalidWindow(window));
    }
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let r = (window / 2) as isize;

    // Horizontal clamped window sums, then vertical accumulation. The
    // clamp acts independently per axis, so this reproduces the exact
    // multiset of replicate-padded samples, duplicates included.
    let mut row_sums = vec![0u16; w * h];
    for y in 0..h {
        let row = &bits[y * w..(y + 1) * w];
        let out = &mut row_sums[y * w..(y + 1) * w];
        for (x, sum) in out.iter_mut().enumerate() {
            let mut s = 0u16;
            for dx in -r..=r {
                let cx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                s += row[cx] as u16;
            }
            *sum = s;
        }
    }

    let majority = (window * window).div_ceil(2) as u16;
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0u16;
            for dy in -r..=r {
                let cy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                s += row_sums[cy * w + x];
            }
            out[y * w + x] = (s >= majority) as u8;
        }
    }
    Ok(BinaryMask::new(w, h, out).expect("filter preserves dimensions"))
}

/// OR of the original buffer with copies shifted by up to `r` along rows.
fn rows_or(bits: &[u8], w: usize, h: usize, r: usize) -> Vec<u8> {
    let mut out = bits.to_vec();
    for y in 0..h {
        let src = &bits[y * w..(y + 1) * w];
        let dst = &mut out[y * w..(y + 1) * w];
        for d in 1..=r.min(w.saturating_sub(1)) {
            for x in 0..w - d {
                dst[x] |= src[x + d];
                dst[x + d] |= src[x];
            }
        }
    }
    out
}

fn rows_and(bits: &[u8], w: usize, h: usize, r: usize) -> Vec<u8> {
    let mut out = bits.to_vec();
    for y in 0..h {
        let src = &bits[y * w..(y + 1) * w];
        let dst = &mut out[y * w..(y + 1) * w];
        for d in 1..=r.min(w.saturating_sub(1)) {
            for x in 0..w - d {
                dst[x] &= src[x + d];
                dst[x + d] &= src[x];
            }
        }
    }
    out
}

fn cols_or(bits: &[u8], w: usize, h: usize, r: usize) -> Vec<u8> {
    let mut out = bits.to_vec();
    for d in 1..=r.min(h.saturating_sub(1)) {
        for y in 0..h - d {
            let (upper, lower) = (y * w, (y + d) * w);
            for x in 0..w {
                out[upper + x] |= bits[lower + x];
                out[lower + x] |= bits[upper + x];
            }
        }
    }
    out
}

fn cols_and(bits: &[u8], w: usize, h: usize, r: usize) -> Vec<u8> {
    let mut out = bits.to_vec();
    for d in 1..=r.min(h.saturating_sub(1)) {
        for y in 0..h - d {
            let (upper, lower) = (y * w, (y + d) * w);
            for x in 0..w {
                out[upper + x] &= bits[lower + x];
                out[lower + x] &= bits[upper + x];
            }
        }
    }
    out
}

/// Output pixel is foreground iff any input pixel under the translated
/// element is foreground.
pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let r = se.radius;
    // A square decomposes into a horizontal then vertical segment; a
    // cross is the union of the two segments, so its dilation is the
    // union of the 1-D dilations.
    let out = match se.shape {
        SeShape::Square => cols_or(&rows_or(mask.bits(), w, h, r), w, h, r),
        SeShape::Cross => {
            let mut a = rows_or(mask.bits(), w, h, r);
            let b = cols_or(mask.bits(), w, h, r);
            for (x, y) in a.iter_mut().zip(&b) {
                *x |= *y;
            }
            a
        }
    };
    BinaryMask::new(w, h, out).expect("dilation preserves dimensions")
}

/// Output pixel is foreground iff every in-bounds input pixel under the
/// translated element is foreground.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let r = se.radius;
    // Erosion by a union of segments is the intersection of the
    // per-segment erosions.
    let out = match se.shape {
        SeShape::Square => cols_and(&rows_and(mask.bits(), w, h, r), w, h, r),
        SeShape::Cross => {
            let mut a = rows_and(mask.bits(), w, h, r);
            let b = cols_and(mask.bits(), w, h, r);
            for (x, y) in a.iter_mut().zip(&b) {
                *x &= *y;
            }
            a
        }
    };
    BinaryMask::new(w, h, out).expect("erosion preserves dimensions")
}

/// Morphological closing: dilation followed by erosion with the same
/// element. Fills holes smaller than the element.
pub fn close(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    erode(&dilate(mask, se), se)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::reference;

    fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| rng.random_bool(density))
    }

    #[test]
    fn median_rejects_bad_windows() {
        let mask = BinaryMask::zeros(4, 4);
        for bad in [1, 2, 4, 11] {
            assert!(matches!(
                median_filter(&mask, bad),
                Err(Error::InvalidWindow(_))
            ));
        }
    }

    #[test]
    fn median_leaves_constant_masks_fixed() {
        let zero = BinaryMask::zeros(6, 5);
        assert_eq!(median_filter(&zero, 3).unwrap(), zero);
        let one = BinaryMask::from_fn(6, 5, |_, _| true);
        assert_eq!(median_filter(&one, 5).unwrap(), one);
    }

    #[test]
    fn median_removes_isolated_pixel() {
        let mut mask = BinaryMask::zeros(5, 5);
        mask.set(2, 2, true);
        let filtered = median_filter(&mask, 3).unwrap();
        assert_eq!(filtered.count_ones(), 0);
    }

    #[test]
    fn median_matches_sort_window_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in 0..60 {
            let mask = random_mask(&mut rng, 32, 32, 0.2 + 0.01 * (case % 60) as f64);
            for window in [3, 5, 7, 9] {
                assert_eq!(
                    median_filter(&mask, window).unwrap(),
                    reference::median_oracle(&mask, window),
                    "window {window}"
                );
            }
        }
    }

    #[test]
    fn dilate_empty_stays_empty() {
        let mask = BinaryMask::zeros(7, 7);
        let se = StructuringElement::square(1).unwrap();
        assert_eq!(dilate(&mask, &se).count_ones(), 0);
    }

    #[test]
    fn dilate_center_pixel_becomes_block() {
        let mut mask = BinaryMask::zeros(7, 7);
        mask.set(3, 3, true);
        let out = dilate(&mask, &StructuringElement::square(1).unwrap());
        let expected =
            BinaryMask::from_fn(7, 7, |x, y| (2..=4).contains(&x) && (2..=4).contains(&y));
        assert_eq!(out, expected);
    }

    #[test]
    fn dilate_center_pixel_with_cross_becomes_plus() {
        let mut mask = BinaryMask::zeros(5, 5);
        mask.set(2, 2, true);
        let out = dilate(&mask, &StructuringElement::cross(1).unwrap());
        assert_eq!(out.count_ones(), 5);
        assert!(out.get(2, 2) && out.get(1, 2) && out.get(3, 2) && out.get(2, 1) && out.get(2, 3));
    }

    #[test]
    fn erode_full_stays_full() {
        let full = BinaryMask::from_fn(6, 4, |_, _| true);
        for se in [
            StructuringElement::square(2).unwrap(),
            StructuringElement::cross(3).unwrap(),
        ] {
            assert_eq!(erode(&full, &se), full);
        }
    }

    #[test]
    fn erode_block_to_center() {
        let mask = BinaryMask::from_fn(7, 7, |x, y| (2..=4).contains(&x) && (2..=4).contains(&y));
        let out = erode(&mask, &StructuringElement::square(1).unwrap());
        assert_eq!(out.count_ones(), 1);
        assert!(out.get(3, 3));
    }

    #[test]
    fn morphology_matches_set_definition_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let elements = [
            StructuringElement::square(1).unwrap(),
            StructuringElement::square(2).unwrap(),
            StructuringElement::cross(1).unwrap(),
            StructuringElement::cross(2).unwrap(),
            StructuringElement::square(3).unwrap(),
        ];
        for case in 0..50 {
            let mask = random_mask(&mut rng, 32, 32, 0.15 + 0.014 * (case as f64));
            for se in &elements {
                assert_eq!(dilate(&mask, se), reference::dilate_oracle(&mask, se));
                assert_eq!(erode(&mask, se), reference::erode_oracle(&mask, se));
                assert_eq!(close(&mask, se), reference::close_oracle(&mask, se));
            }
        }
    }

    #[test]
    fn elements_larger_than_the_image_still_match_the_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for se in [
            StructuringElement::square(12).unwrap(),
            StructuringElement::cross(12).unwrap(),
        ] {
            for _ in 0..5 {
                let mask = random_mask(&mut rng, 8, 6, 0.5);
                assert_eq!(dilate(&mask, &se), reference::dilate_oracle(&mask, &se));
                assert_eq!(erode(&mask, &se), reference::erode_oracle(&mask, &se));
                assert_eq!(close(&mask, &se), reference::close_oracle(&mask, &se));
            }
        }
    }

    #[test]
    fn close_fills_single_pixel_hole() {
        let mut mask = BinaryMask::from_fn(5, 5, |_, _| true);
        mask.set(2, 2, false);
        let out = close(&mask, &StructuringElement::square(1).unwrap());
        assert!(out.get(2, 2));
        assert_eq!(out, BinaryMask::from_fn(5, 5, |_, _| true));
    }

    #[test]
    fn close_fills_interior_hole_away_from_borders() {
        // A fat ring with a 1-px hole, kept clear of the image frame so
        // the dilation never touches the border.
        let blob = |x: usize, y: usize| (4..=12).contains(&x) && (4..=12).contains(&y);
        let mut mask = BinaryMask::from_fn(17, 17, blob);
        mask.set(8, 8, false);
        let out = close(&mask, &StructuringElement::square(1).unwrap());
        assert_eq!(out, BinaryMask::from_fn(17, 17, blob));
    }

    #[test]
    fn close_empty_stays_empty() {
        let mask = BinaryMask::zeros(9, 9);
        let se = StructuringElement::square(2).unwrap();
        assert_eq!(close(&mask, &se).count_ones(), 0);
    }

    #[test]
    fn closing_is_extensive_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let se = StructuringElement::square(2).unwrap();
        for _ in 0..50 {
            let mask = random_mask(&mut rng, 24, 24, 0.4);
            let once = close(&mask, &se);
            assert!(mask.is_subset_of(&once));
            assert_eq!(close(&once, &se), once);
        }
    }

    #[test]
    fn operators_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let se = StructuringElement::cross(2).unwrap();
        for _ in 0..30 {
            let small = random_mask(&mut rng, 20, 20, 0.3);
            // Superset built by adding extra foreground to `small`.
            let big = {
                let extra = random_mask(&mut rng, 20, 20, 0.2);
                BinaryMask::from_fn(20, 20, |x, y| small.get(x, y) || extra.get(x, y))
            };
            assert!(dilate(&small, &se).is_subset_of(&dilate(&big, &se)));
            assert!(erode(&small, &se).is_subset_of(&erode(&big, &se)));
            assert!(close(&small, &se).is_subset_of(&close(&big, &se)));
        }
    }

    #[test]
    fn zero_radius_is_rejected() {
        assert!(StructuringElement::square(0).is_err());
    }
}
