//! Binary PGM (P5) reader and writer.
//!
//! Header layout: magic `P5`, then width, height and maxval as ASCII
//! decimal tokens separated by whitespace. Comments starting with `#`
//! run to end of line and are allowed wherever whitespace is. Exactly
//! one whitespace byte separates the maxval token from the raster.
//! Samples are 1 byte for maxval <= 255, otherwise 2 bytes big-endian.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imgio::GrayImage;

fn is_pgm_whitespace(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

struct HeaderScanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderScanner<'a> {
    fn new(bytes: &'a [u8], pos: usize) -> Self {
        HeaderScanner { bytes, pos }
    }

    /// Skips whitespace and `#` comments between header tokens.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if is_pgm_whitespace(b) {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads one ASCII decimal token.
    fn next_number(&mut self, field: &str) -> Result<u64> {
        self.skip_separators();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_digit() {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(Error::MalformedHeader(format!(
                "expected numeric {field} field"
            )));
        }
        let token = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        token
            .parse::<u64>()
            .map_err(|_| Error::MalformedHeader(format!("{field} field out of range")))
    }
}

/// Parses a binary PGM from memory.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::MalformedHeader("expected magic \"P5\"".into()));
    }
    // The magic is a token of its own; whitespace (or a comment) must
    // follow before the width.
    match bytes.get(2) {
        Some(&b) if is_pgm_whitespace(b) || b == b'#' => {}
        _ => {
            return Err(Error::MalformedHeader(
                "expected whitespace after magic".into(),
            ))
        }
    }
    let mut scanner = HeaderScanner::new(bytes, 2);
    let width = scanner.next_number("width")?;
    let height = scanner.next_number("height")?;
    let maxval = scanner.next_number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    let width =
        usize::try_from(width).map_err(|_| Error::MalformedHeader("width out of range".into()))?;
    let height = usize::try_from(height)
        .map_err(|_| Error::MalformedHeader("height out of range".into()))?;
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;

    // Exactly one whitespace byte between the maxval token and the raster.
    match bytes.get(scanner.pos) {
        Some(&b) if is_pgm_whitespace(b) => {}
        _ => {
            return Err(Error::MalformedHeader(
                "expected single whitespace byte before raster".into(),
            ))
        }
    }
    let raster = &bytes[scanner.pos + 1..];

    let bytes_per_sample = if maxval <= 255 { 1 } else { 2 };
    let needed = count
        .checked_mul(bytes_per_sample)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    if raster.len() < needed {
        return Err(Error::TruncatedData {
            expected: needed,
            found: raster.len(),
        });
    }

    let pixels: Vec<u16> = if bytes_per_sample == 1 {
        raster[..count].iter().map(|&b| b as u16).collect()
    } else {
        raster[..needed]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    GrayImage::new(width, height, maxval as u16, pixels)
}

/// Encodes an image as a binary PGM. Inverse of [`read_pgm`]:
/// `read_pgm(&write_pgm(img))` reproduces `img` bit-exactly.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!(
        "P5\n{} {}\n{}\n",
        img.width(),
        img.height(),
        img.max_value()
    );
    let mut out = header.into_bytes();
    if img.max_value() <= 255 {
        out.extend(img.pixels().iter().map(|&p| p as u8));
    } else {
        for &p in img.pixels() {
            out.extend_from_slice(&p.to_be_bytes());
        }
    }
    out
}

pub fn read_pgm_file(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_pgm(&bytes)
}

pub fn write_pgm_file(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_pgm(img)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn reads_smallest_well_formed_file() {
        let img = read_pgm(b"P5 2 1 255 \x07\x09").unwrap();
        assert_eq!((img.width(), img.height(), img.max_value()), (2, 1, 255));
        assert_eq!(img.pixels(), &[7, 9]);
    }

    #[test]
    fn reads_two_byte_samples_big_endian() {
        let img = read_pgm(b"P5 1 1 65535 \x01\x00").unwrap();
        assert_eq!(img.pixels(), &[256]);
    }

    #[test]
    fn detects_truncated_raster() {
        let err = read_pgm(b"P5 2 2 255 \x00\x00\x00").unwrap_err();
        assert!(matches!(
            err,
            Error::TruncatedData {
                expected: 4,
                found: 3
            }
        ));
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(matches!(
            read_pgm(b"P2 1 1 255 \x00"),
            Err(Error::MalformedHeader(_))
        ));
        // The magic must be its own whitespace-separated token.
        assert!(matches!(
            read_pgm(b"P52 1 255 \x00\x00"),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn rejects_non_numeric_fields() {
        assert!(matches!(
            read_pgm(b"P5 ab 1 255 \x00"),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn rejects_unsupported_maxval() {
        assert!(matches!(
            read_pgm(b"P5 1 1 0 \x00"),
            Err(Error::UnsupportedMaxval(0))
        ));
        assert!(matches!(
            read_pgm(b"P5 1 1 70000 \x00\x00"),
            Err(Error::UnsupportedMaxval(70000))
        ));
    }

    #[test]
    fn rejects_zero_dimensions() {
        assert!(matches!(
            read_pgm(b"P5 0 3 255 "),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn skips_comments_between_tokens() {
        let img = read_pgm(b"P5 # made by hand\n2 # width done\n 1\n255\n\x05\x06").unwrap();
        assert_eq!(img.pixels(), &[5, 6]);
    }

    #[test]
    fn writes_canonical_header() {
        let img = GrayImage::constant(1, 1, 255, 0);
        assert_eq!(write_pgm(&img), b"P5\n1 1\n255\n\x00");
    }

    #[test]
    fn writes_two_byte_samples_big_endian() {
        let img = GrayImage::new(2, 1, 65535, vec![256, 1]).unwrap();
        let bytes = write_pgm(&img);
        assert_eq!(&bytes[bytes.len() - 4..], &[0x01, 0x00, 0x00, 0x01]);
    }

    fn random_image(rng: &mut ChaCha8Rng) -> GrayImage {
        let width = rng.random_range(1..=24);
        let height = rng.random_range(1..=24);
        let max_value: u16 = if rng.random_bool(0.5) {
            rng.random_range(1..=255)
        } else {
            rng.random_range(256..=65535)
        };
        GrayImage::from_fn(width, height, max_value, |_, _| {
            rng.random_range(0..=max_value)
        })
    }

    #[test]
    fn roundtrip_is_bit_exact_over_seeded_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9c0ffee);
        for _ in 0..100 {
            let img = random_image(&mut rng);
            let back = read_pgm(&write_pgm(&img)).unwrap();
            assert_eq!(back, img);
        }
    }

    proptest! {
        #[test]
        fn roundtrip_property(
            width in 1usize..16,
            height in 1usize..16,
            wide in proptest::bool::ANY,
            seed in proptest::num::u64::ANY,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let max_value: u16 = if wide {
                rng.random_range(256..=65535)
            } else {
                rng.random_range(1..=255)
            };
            let img = GrayImage::from_fn(width, height, max_value, |_, _| {
                rng.random_range(0..=max_value)
            });
            let back = read_pgm(&write_pgm(&img)).unwrap();
            prop_assert_eq!(back, img);
        }
    }
}
