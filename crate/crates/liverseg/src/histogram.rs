//! Intensity histograms, the two-threshold band binarization that
//! isolates the liver's intensity interval, and exhaustive grid-search
//! calibration of that interval against ground-truth masks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::dice;
use crate::imgio::{BinaryMask, GrayImage};
use crate::pipeline::{self, PipelineConfig};

/// 256-bin intensity histogram of an 8-bit image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; 256],
    total: u64,
}

impl Histogram {
    /// `bins[v]` = number of pixels with intensity `v`.
    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    /// Total pixel count; always equals the sum of the bins.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Renders the histogram as 256 CSV lines `intensity,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(256 * 8);
        for (intensity, count) in self.bins.iter().enumerate() {
            out.push_str(&format!("{intensity},{count}\n"));
        }
        out
    }
}

/// Counts pixels per intensity. The image must be 8-bit.
pub fn compute_histogram(img: &GrayImage) -> Histogram {
    assert!(
        img.max_value() <= 255,
        "histogram requires an 8-bit image (max_value {})",
        img.max_value()
    );
    let mut bins = [0u64; 256];
    for &p in img.pixels() {
        bins[p as usize] += 1;
    }
    Histogram {
        bins,
        total: img.pixels().len() as u64,
    }
}

/// The intensity interval `[s1, s2]` delimiting the liver. Both bounds
/// are inclusive, so `s1 == s2` selects exactly one intensity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdPair {
    s1: u8,
    s2: u8,
}

impl ThresholdPair {
    pub fn new(s1: u8, s2: u8) -> Result<Self> {
        if s1 > s2 {
            return Err(Error::InvalidBand { s1, s2 });
        }
        Ok(ThresholdPair { s1, s2 })
    }

    pub fn s1(&self) -> u8 {
        self.s1
    }

    pub fn s2(&self) -> u8 {
        self.s2
    }

    #[inline]
    pub fn contains(&self, intensity: u16) -> bool {
        self.s1 as u16 <= intensity && intensity <= self.s2 as u16
    }
}

/// Keeps pixels whose intensity lies inside the band: everything below
/// `s1` and above `s2` is cut away.
pub fn band_threshold(img: &GrayImage, t: ThresholdPair) -> BinaryMask {
    let bits = img.pixels().iter().map(|&p| t.contains(p) as u8).collect();
    BinaryMask::new(img.width(), img.height(), bits).expect("threshold preserves dimensions")
}

/// Exhaustive grid search for the band maximizing mean Dice of the
/// *full* pipeline against the ground truth of every sample.
///
/// `s1` ranges over `{0, step, 2*step, ...}` and `s2` over the same
/// grid with `s2 >= s1`. A sample on which the pipeline finds no liver
/// scores 0 for that grid point. Ties break to the smaller `s1`, then
/// the smaller `s2`. `base` supplies the non-threshold stage parameters.
pub fn calibrate_thresholds(
    samples: &[(GrayImage, BinaryMask)],
    step: usize,
    base: &PipelineConfig,
) -> Result<(ThresholdPair, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if !(1..=64).contains(&step) {
        return Err(Error::InvalidParameter(format!(
            "calibration step must be in 1..=64 (got {step})"
        )));
    }
    for (img, truth) in samples {
        if img.width() != truth.width() || img.height() != truth.height() {
            return Err(Error::DimensionMismatch(
                img.width(),
                img.height(),
                truth.width(),
                truth.height(),
            ));
        }
    }

    let mut best: Option<(ThresholdPair, f64)> = None;
    for s1 in (0..=255u16).step_by(step) {
        for s2 in (s1..=255u16).step_by(step) {
            let pair = ThresholdPair::new(s1 as u8, s2 as u8).expect("grid keeps s1 <= s2");
            let mut cfg = *base;
            cfg.thresholds = pair;
            let mut sum = 0.0;
            for (img, truth) in samples {
                if let Some(found) = pipeline::run_liver_stage(img, &cfg)? {
                    sum += dice(&found.closed, truth)?;
                }
            }
            let mean = sum / samples.len() as f64;
            // Strict improvement only: the (s1, s2)-ascending scan makes
            // the first of any tied maxima win.
            if best.is_none_or(|(_, score)| mean > score) {
                best = Some((pair, mean));
            }
        }
    }
    Ok(best.expect("grid is never empty"))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::imgio::make_phantom;

    #[test]
    fn histogram_counts_simple_image() {
        let img = GrayImage::new(2, 2, 255, vec![0, 0, 5, 5]).unwrap();
        let h = compute_histogram(&img);
        assert_eq!(h.bins()[0], 2);
        assert_eq!(h.bins()[5], 2);
        assert_eq!(h.bins().iter().sum::<u64>(), 4);
        assert_eq!(h.total(), 4);
    }

    #[test]
    fn histogram_of_constant_image() {
        let img = GrayImage::constant(4, 4, 255, 7);
        let h = compute_histogram(&img);
        assert_eq!(h.bins()[7], 16);
        assert_eq!(h.bins().iter().filter(|&&c| c > 0).count(), 1);
    }

    #[test]
    fn histogram_matches_per_value_counting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let img = GrayImage::from_fn(8, 8, 255, |_, _| rng.random_range(0..=255));
        let h = compute_histogram(&img);
        assert_eq!(h.total(), 64);
        for v in 0..=255u16 {
            let expected = img.pixels().iter().filter(|&&p| p == v).count() as u64;
            assert_eq!(h.bins()[v as usize], expected, "intensity {v}");
        }
    }

    #[test]
    fn histogram_csv_has_256_rows() {
        let img = GrayImage::constant(4, 4, 255, 7);
        let csv = compute_histogram(&img).to_csv();
        assert_eq!(csv.lines().count(), 256);
        assert!(csv.lines().any(|l| l == "7,16"));
    }

    #[test]
    fn band_keeps_interior_intensities() {
        let img = GrayImage::new(3, 1, 255, vec![10, 100, 200]).unwrap();
        let mask = band_threshold(&img, ThresholdPair::new(50, 150).unwrap());
        assert_eq!(mask.bits(), &[0, 1, 0]);
    }

    #[test]
    fn full_band_selects_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = GrayImage::from_fn(9, 4, 255, |_, _| rng.random_range(0..=255));
        let mask = band_threshold(&img, ThresholdPair::new(0, 255).unwrap());
        assert_eq!(mask.count_ones(), 36);
    }

    #[test]
    fn degenerate_band_selects_exactly_its_bin() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let img = GrayImage::from_fn(16, 16, 255, |_, _| rng.random_range(0..=15));
        let h = compute_histogram(&img);
        for v in 0..=15u8 {
            let mask = band_threshold(&img, ThresholdPair::new(v, v).unwrap());
            assert_eq!(mask.count_ones() as u64, h.bins()[v as usize]);
        }
    }

    #[test]
    fn invalid_band_is_rejected() {
        assert!(matches!(
            ThresholdPair::new(200, 100),
            Err(Error::InvalidBand { s1: 200, s2: 100 })
        ));
    }

    proptest! {
        #[test]
        fn band_matches_pointwise_membership(seed in proptest::num::u64::ANY, s1 in 0u8..=255, span in 0u8..=255) {
            let s2 = s1.saturating_add(span);
            let pair = ThresholdPair::new(s1, s2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let img = GrayImage::from_fn(12, 7, 255, |_, _| rng.random_range(0..=255));
            let mask = band_threshold(&img, pair);
            for y in 0..7 {
                for x in 0..12 {
                    let p = img.get(x, y);
                    prop_assert_eq!(mask.get(x, y), pair.s1() as u16 <= p && p <= pair.s2() as u16);
                }
            }
        }

        #[test]
        fn widening_the_band_is_monotone(seed in proptest::num::u64::ANY, a in 20u8..=200, b in 20u8..=200) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let inner = ThresholdPair::new(lo, hi).unwrap();
            let outer = ThresholdPair::new(lo - 10, hi.saturating_add(10)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let img = GrayImage::from_fn(10, 10, 255, |_, _| rng.random_range(0..=255));
            prop_assert!(band_threshold(&img, inner).is_subset_of(&band_threshold(&img, outer)));
        }
    }

    #[test]
    fn histogram_mass_is_conserved_on_random_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let w = rng.random_range(1..=40);
            let h = rng.random_range(1..=40);
            let img = GrayImage::from_fn(w, h, 255, |_, _| rng.random_range(0..=255));
            let hist = compute_histogram(&img);
            assert_eq!(hist.bins().iter().sum::<u64>(), (w * h) as u64);
        }
    }

    #[test]
    fn calibration_recovers_the_construction_band() {
        let band = ThresholdPair::new(90, 150).unwrap();
        let phantom = make_phantom(128, 128, 11, 0.0, band).unwrap();
        let samples = vec![(phantom.image, phantom.truth)];
        let (pair, mean) = calibrate_thresholds(&samples, 10, &PipelineConfig::default()).unwrap();
        assert_eq!(mean, 1.0, "recovered pair {pair:?} must be perfect");
    }

    #[test]
    fn calibration_is_deterministic() {
        let band = ThresholdPair::new(90, 150).unwrap();
        let phantom = make_phantom(96, 96, 5, 4.0, band).unwrap();
        let samples = vec![(phantom.image, phantom.truth)];
        let a = calibrate_thresholds(&samples, 25, &PipelineConfig::default()).unwrap();
        let b = calibrate_thresholds(&samples, 25, &PipelineConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn calibration_ties_break_to_smaller_bounds() {
        // Phantom liver intensities span [90, 150]; background sits near
        // 30..60 and organ blobs at 210+. Two rectangles pasted over the
        // right half ruin every band reaching 75 or 200, and no pixel
        // falls in 80..=89 or 151..=199, so (80,150)..(90,190) all tie at
        // Dice 1.0 and the smaller bounds must win.
        let band = ThresholdPair::new(90, 150).unwrap();
        let phantom = make_phantom(128, 128, 21, 0.0, band).unwrap();
        let (w, h) = (phantom.image.width(), phantom.image.height());
        let img = GrayImage::from_fn(w, h, 255, |x, y| {
            if (67..125).contains(&x) {
                if (4..62).contains(&y) {
                    return 75;
                }
                if (62..125).contains(&y) {
                    return 200;
                }
            }
            phantom.image.get(x, y)
        });
        // The pasted rectangles are larger than the liver.
        let liver_area = phantom.truth.count_ones();
        assert!(58 * 58 > liver_area);

        let samples = vec![(img, phantom.truth)];
        let (pair, mean) = calibrate_thresholds(&samples, 10, &PipelineConfig::default()).unwrap();
        assert_eq!(mean, 1.0);
        assert_eq!((pair.s1(), pair.s2()), (80, 150));
    }

    #[test]
    fn calibration_rejects_empty_sample_set() {
        let result = calibrate_thresholds(&[], 10, &PipelineConfig::default());
        assert!(matches!(result, Err(Error::EmptySampleSet)));
    }

    #[test]
    fn calibration_rejects_bad_step() {
        let band = ThresholdPair::new(90, 150).unwrap();
        let phantom = make_phantom(64, 64, 1, 0.0, band).unwrap();
        let samples = vec![(phantom.image, phantom.truth)];
        for bad in [0, 65] {
            assert!(matches!(
                calibrate_thresholds(&samples, bad, &PipelineConfig::default()),
                Err(Error::InvalidParameter(_))
            ));
        }
    }
}
