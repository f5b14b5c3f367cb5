//! Naive reference implementations used as independent oracles by the
//! test suites. Everything here trades speed for obviousness: set
//! definitions, sorted windows, breadth-first search and direct
//! double-loop convolution. None of it shares code with the optimized
//! implementations it checks.

use std::collections::VecDeque;

use crate::contour::GradientImage;
use crate::filtering::StructuringElement;
use crate::imgio::{BinaryMask, GrayImage};

/// Breadth-first 4-connected labeling. Components are numbered 1..count
/// in order of first appearance in row-major scan order.
pub fn flood_fill_labels(mask: &BinaryMask) -> (Vec<u32>, usize) {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; w * h];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if mask.bits()[start] == 0 || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            let (x, y) = (idx % w, idx / w);
            let mut visit = |nx: usize, ny: usize| {
                let nidx = ny * w + nx;
                if mask.bits()[nidx] != 0 && labels[nidx] == 0 {
                    labels[nidx] = count;
                    queue.push_back(nidx);
                }
            };
            if x > 0 {
                visit(x - 1, y);
            }
            if x + 1 < w {
                visit(x + 1, y);
            }
            if y > 0 {
                visit(x, y - 1);
            }
            if y + 1 < h {
                visit(x, y + 1);
            }
        }
    }
    (labels, count as usize)
}

/// True when two label images describe the same partition of the
/// foreground, regardless of how the components are numbered.
pub fn partitions_equal(a: &[u32], b: &[u32]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a_to_b: Vec<Option<u32>> = Vec::new();
    let mut b_to_a: Vec<Option<u32>> = Vec::new();
    for (&la, &lb) in a.iter().zip(b) {
        if (la == 0) != (lb == 0) {
            return false;
        }
        if la == 0 {
            continue;
        }
        let (ia, ib) = (la as usize, lb as usize);
        if a_to_b.len() <= ia {
            a_to_b.resize(ia + 1, None);
        }
        if b_to_a.len() <= ib {
            b_to_a.resize(ib + 1, None);
        }
        match (a_to_b[ia], b_to_a[ib]) {
            (None, None) => {
                a_to_b[ia] = Some(lb);
                b_to_a[ib] = Some(la);
            }
            (Some(mb), Some(ma)) if mb == lb && ma == la => {}
            _ => return false,
        }
    }
    true
}

/// Median filter by literally sorting each clamped window.
pub fn median_oracle(mask: &BinaryMask, window: usize) -> BinaryMask {
    let r = (window / 2) as isize;
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        let mut samples = Vec::with_capacity(window * window);
        for dy in -r..=r {
            for dx in -r..=r {
                let cx = (x as isize + dx).clamp(0, w - 1) as usize;
                let cy = (y as isize + dy).clamp(0, h - 1) as usize;
                samples.push(mask.get(cx, cy) as u8);
            }
        }
        samples.sort_unstable();
        samples[samples.len() / 2] != 0
    })
}

/// Dilation straight from the set definition: union over the element's
/// in-bounds offsets.
pub fn dilate_oracle(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let offsets = se.offsets();
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        offsets.iter().any(|&(dx, dy)| {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            nx >= 0 && nx < w && ny >= 0 && ny < h && mask.get(nx as usize, ny as usize)
        })
    })
}

/// Erosion straight from the set definition: intersection over the
/// element's in-bounds offsets (out-of-bounds cells are ignored).
pub fn erode_oracle(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let offsets = se.offsets();
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        offsets.iter().all(|&(dx, dy)| {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            nx < 0 || nx >= w || ny < 0 || ny >= h || mask.get(nx as usize, ny as usize)
        })
    })
}

/// Closing composed from the two oracles above.
pub fn close_oracle(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    erode_oracle(&dilate_oracle(mask, se), se)
}

/// Sobel gradient by direct double-loop convolution with replicate
/// padding; magnitude is |Gx| + |Gy|.
pub fn sobel_oracle(img: &GrayImage) -> GradientImage {
    const KX: [[i64; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
    const KY: [[i64; 3]; 3] = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];
    let mut magnitudes = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() as isize {
        for x in 0..img.width() as isize {
            let mut gx = 0i64;
            let mut gy = 0i64;
            for ky in 0..3 {
                for kx in 0..3 {
                    let v = img.get_clamped(x + kx as isize - 1, y + ky as isize - 1) as i64;
                    gx += KX[ky][kx] * v;
                    gy += KY[ky][kx] * v;
                }
            }
            magnitudes.push((gx.abs() + gy.abs()) as u32);
        }
    }
    GradientImage::from_raw(img.width(), img.height(), magnitudes)
}

/// True when the first labeling pass over `mask` would record at least
/// one equivalence merge (top and left neighbors carrying different
/// provisional labels). Simulated independently of the real
/// implementation.
pub fn requires_label_merge(mask: &BinaryMask) -> bool {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if bits[idx] == 0 {
                continue;
            }
            let top = if y > 0 { labels[idx - w] } else { 0 };
            let left = if x > 0 { labels[idx - 1] } else { 0 };
            labels[idx] = match (top, left) {
                (0, 0) => {
                    next += 1;
                    next
                }
                (t, 0) => t,
                (0, l) => l,
                (t, l) if t == l => t,
                (_, _) => return true,
            };
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_equal_ignores_numbering() {
        assert!(partitions_equal(&[0, 1, 2, 1], &[0, 2, 1, 2]));
        assert!(!partitions_equal(&[0, 1, 2, 1], &[0, 1, 1, 1]));
        assert!(!partitions_equal(&[0, 1], &[1, 1]));
    }

    #[test]
    fn flood_fill_counts_simple_shapes() {
        let mask = BinaryMask::new(3, 3, vec![1, 0, 1, 1, 0, 1, 1, 1, 1]).unwrap();
        let (_, count) = flood_fill_labels(&mask);
        assert_eq!(count, 1);
    }

    #[test]
    fn merge_detection_matches_hand_cases() {
        // U-shape needs a merge; a single bar does not.
        let u = BinaryMask::new(3, 3, vec![1, 0, 1, 1, 0, 1, 1, 1, 1]).unwrap();
        assert!(requires_label_merge(&u));
        let bar = BinaryMask::new(3, 1, vec![1, 1, 1]).unwrap();
        assert!(!requires_label_merge(&bar));
    }
}
