//! Seeded synthetic abdominal phantoms with exact ground truth.
//!
//! Each phantom is a CT-like slice: a large irregular "liver" blob in
//! the left half whose intensities fall inside the requested band, a
//! smaller in-band "spleen" distractor on the right, a few out-of-band
//! organ blobs, an out-of-band background, and optional additive
//! Gaussian noise. The truth mask marks exactly the liver blob.
//!
//! The liver shape is iterated to a fixed point of the pipeline's
//! despeckle-then-close operator (median window 3, square element of
//! radius 2), so running the default pipeline on a noise-free phantom
//! reproduces the truth mask bit-exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::filtering::{close, median_filter, StructuringElement};
use crate::histogram::ThresholdPair;
use crate::imgio::{BinaryMask, GrayImage};
use crate::pipeline::{DEFAULT_MEDIAN_WINDOW, DEFAULT_SE_RADIUS, DEFAULT_SE_SHAPE};

/// Smallest supported phantom side length.
pub const MIN_PHANTOM_DIM: usize = 64;

/// A synthetic slice together with its exact ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Phantom {
    pub image: GrayImage,
    pub truth: BinaryMask,
    pub seed: u64,
    pub noise_sigma: f64,
}

/// A wobbly ellipse: an ellipse whose radius is modulated by a few
/// low-frequency harmonics, enough to look organic while staying smooth.
struct Blob {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    amps: [f64; 3],
    phases: [f64; 3],
}

impl Blob {
    fn sample_wobble(rng: &mut ChaCha8Rng, cx: f64, cy: f64, rx: f64, ry: f64) -> Self {
        let mut amps = [0.0; 3];
        let mut phases = [0.0; 3];
        for k in 0..3 {
            amps[k] = rng.random_range(0.02..=0.05);
            phases[k] = rng.random_range(0.0..std::f64::consts::TAU);
        }
        Blob {
            cx,
            cy,
            rx,
            ry,
            amps,
            phases,
        }
    }

    fn fixed(cx: f64, cy: f64, rx: f64, ry: f64) -> Self {
        Blob {
            cx,
            cy,
            rx,
            ry,
            amps: [0.0; 3],
            phases: [0.0; 3],
        }
    }

    fn contains(&self, x: usize, y: usize) -> bool {
        let dx = (x as f64 + 0.5 - self.cx) / self.rx;
        let dy = (y as f64 + 0.5 - self.cy) / self.ry;
        let rho = (dx * dx + dy * dy).sqrt();
        let theta = dy.atan2(dx);
        let mut boundary = 1.0;
        for k in 0..3 {
            boundary += self.amps[k] * ((k as f64 + 2.0) * theta + self.phases[k]).cos();
        }
        rho <= boundary
    }

    fn rasterize(&self, width: usize, height: usize) -> BinaryMask {
        // Membership only needs evaluating inside the bounding box of the
        // maximal radius (wobble factor <= 1.15).
        let x_lo = ((self.cx - self.rx * 1.2).floor().max(0.0)) as usize;
        let x_hi = ((self.cx + self.rx * 1.2).ceil() as usize).min(width);
        let y_lo = ((self.cy - self.ry * 1.2).floor().max(0.0)) as usize;
        let y_hi = ((self.cy + self.ry * 1.2).ceil() as usize).min(height);
        let mut mask = BinaryMask::zeros(width, height);
        for y in y_lo..y_hi {
            for x in x_lo..x_hi {
                if self.contains(x, y) {
                    mask.set(x, y, true);
                }
            }
        }
        mask
    }
}

/// Iterates a raw blob to a fixed point of `close(median(.))` with the
/// pipeline's default despeckle and closing parameters.
fn settle_blob(raw: BinaryMask) -> BinaryMask {
    let se = StructuringElement::new(DEFAULT_SE_SHAPE, DEFAULT_SE_RADIUS)
        .expect("default radius is valid");
    let mut blob = raw;
    for _ in 0..32 {
        let next = close(
            &median_filter(&blob, DEFAULT_MEDIAN_WINDOW).expect("default window is valid"),
            &se,
        );
        if next == blob {
            return blob;
        }
        blob = next;
    }
    panic!("phantom blob failed to reach a despeckle/close fixed point");
}

/// Generates a deterministic synthetic slice with ground truth.
///
/// The image is 8-bit. Liver and spleen intensities are uniform inside
/// `band`; background and organ intensities sit strictly outside it
/// (before noise). Gaussian noise of standard deviation `noise_sigma`
/// is added per pixel, rounded, and clamped to `[0, 255]`. Identical
/// arguments always produce bit-identical phantoms.
pub fn make_phantom(
    width: usize,
    height: usize,
    seed: u64,
    noise_sigma: f64,
    band: ThresholdPair,
) -> Result<Phantom> {
    if width < MIN_PHANTOM_DIM || height < MIN_PHANTOM_DIM {
        return Err(Error::TooSmall {
            width,
            height,
            min: MIN_PHANTOM_DIM,
        });
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "noise sigma must be finite and non-negative (got {noise_sigma})"
        )));
    }
    let below = band.s1() as u16;
    let above = 255 - band.s2() as u16;
    let (bg_lo, bg_hi) = if below >= 16 {
        let hi = band.s1().saturating_sub(31);
        (hi.saturating_sub(28), hi)
    } else if above >= 16 {
        let lo = band.s2().saturating_add(31);
        (lo, lo.saturating_add(28))
    } else {
        return Err(Error::InvalidParameter(
            "band leaves no out-of-band intensity room for the phantom background".into(),
        ));
    };
    let (organ_lo, organ_hi) = if above >= 16 {
        let lo = band.s2().saturating_add(40);
        (lo, lo.saturating_add(30))
    } else {
        (bg_lo, bg_hi)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (wf, hf) = (width as f64, height as f64);

    // Liver: big, irregular, strictly in the left half of the slice.
    let liver = Blob::sample_wobble(&mut rng, 0.30 * wf, 0.46 * hf, 0.17 * wf, 0.22 * hf);
    // Spleen: the in-band distractor, strictly smaller and disjoint.
    let spleen = Blob::sample_wobble(&mut rng, 0.76 * wf, 0.70 * hf, 0.10 * wf, 0.12 * hf);
    // Out-of-band organs scattered over the right half.
    let organs = [
        Blob::fixed(0.63 * wf, 0.22 * hf, 0.06 * wf, 0.07 * hf),
        Blob::fixed(0.86 * wf, 0.38 * hf, 0.05 * wf, 0.06 * hf),
        Blob::fixed(0.58 * wf, 0.88 * hf, 0.03 * wf, 0.04 * hf),
    ];

    let truth = settle_blob(liver.rasterize(width, height));
    let spleen_mask = spleen.rasterize(width, height);
    debug_assert!(truth.count_ones() > spleen_mask.count_ones());

    let organ_mask = {
        let mut m = BinaryMask::zeros(width, height);
        for organ in &organs {
            let r = organ.rasterize(width, height);
            for y in 0..height {
                for x in 0..width {
                    if r.get(x, y) {
                        m.set(x, y, true);
                    }
                }
            }
        }
        m
    };

    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let v = if truth.get(x, y) || spleen_mask.get(x, y) {
                rng.random_range(band.s1()..=band.s2())
            } else if organ_mask.get(x, y) {
                rng.random_range(organ_lo..=organ_hi)
            } else {
                rng.random_range(bg_lo..=bg_hi)
            };
            pixels.push(v as u16);
        }
    }

    if noise_sigma > 0.0 {
        for p in pixels.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *p = (*p as f64 + noise_sigma * z).round().clamp(0.0, 255.0) as u16;
        }
    }

    let image = GrayImage::new(width, height, 255, pixels)?;
    Ok(Phantom {
        image,
        truth,
        seed,
        noise_sigma,
    })
}
