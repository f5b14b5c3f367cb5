//! Connected-component labeling and greatest-connected-component
//! extraction.
//!
//! Labeling is the classical two-pass scheme over 4-connectivity: the
//! first pass scans row-major, consulting only the top and left
//! neighbors, assigning provisional labels and recording merges in an
//! equivalence table; the second pass resolves every provisional label
//! to its equivalence root and renumbers the roots densely, 1..count,
//! in order of first appearance.

use crate::error::{Error, Result};
use crate::imgio::BinaryMask;

/// Per-pixel component labels: 0 is background, 1..=count are resolved
/// component ids with no gaps. Two foreground pixels share a label iff
/// they are 4-connected through foreground.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelImage {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: usize,
}

impl LabelImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        debug_assert!(x < self.width && y < self.height);
        self.labels[y * self.width + x]
    }

    /// Number of resolved components.
    pub fn component_count(&self) -> usize {
        self.count
    }
}

/// Union-find table over provisional labels, resolving the merges
/// recorded during the first labeling pass. Roots are always the
/// smallest label of their class.
#[derive(Clone, Debug, Default)]
pub struct EquivalenceTable {
    parent: Vec<u32>,
}

impl EquivalenceTable {
    pub fn new() -> Self {
        // Slot 0 stays unused so labels can index directly.
        EquivalenceTable { parent: vec![0] }
    }

    /// Allocates the next provisional label (1, 2, ...).
    pub fn make_label(&mut self) -> u32 {
        let label = self.parent.len() as u32;
        self.parent.push(label);
        label
    }

    /// Number of provisional labels allocated so far.
    pub fn len(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Root of `label`'s equivalence class, compressing the path walked.
    pub fn find(&mut self, label: u32) -> u32 {
        debug_assert!(label >= 1 && (label as usize) < self.parent.len());
        let mut root = label;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = label;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Records that `a` and `b` name the same component. The smaller
    /// root wins, so `find` afterwards returns `min(root(a), root(b))`.
    pub fn union(&mut self, a: u32, b: u32) -> u32 {
        let ra = self.find(a);
        let rb = self.find(b);
        let (lo, hi) = if ra <= rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Pixel counts per resolved label; index `label - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSizeTable {
    sizes: Vec<usize>,
}

impl ComponentSizeTable {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Pixel count of component `label` (1-based).
    pub fn size_of(&self, label: u32) -> usize {
        self.sizes[label as usize - 1]
    }

    /// Total foreground pixels across all components.
    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Labels the 4-connected foreground components of `mask`. Returns the
/// resolved label image and the component count.
pub fn label_components(mask: &BinaryMask) -> (LabelImage, usize) {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut labels = vec![0u32; w * h];
    let mut table = EquivalenceTable::new();

    // First pass: provisional labels from the top and left neighbors.
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if bits[idx] == 0 {
                continue;
            }
            let top = if y > 0 { labels[idx - w] } else { 0 };
            let left = if x > 0 { labels[idx - 1] } else { 0 };
            labels[idx] = match (top, left) {
                (0, 0) => table.make_label(),
                (t, 0) => t,
                (0, l) => l,
                (t, l) if t == l => t,
                (t, l) => {
                    table.union(t, l);
                    t.min(l)
                }
            };
        }
    }

    // Second pass: replace provisional labels by their roots, then
    // renumber roots densely in order of first appearance.
    let mut dense_of_root = vec![0u32; table.len() + 1];
    let mut count = 0u32;
    for label in labels.iter_mut() {
        if *label == 0 {
            continue;
        }
        let root = table.find(*label);
        if dense_of_root[root as usize] == 0 {
            count += 1;
            dense_of_root[root as usize] = count;
        }
        *label = dense_of_root[root as usize];
    }

    let count = count as usize;
    (
        LabelImage {
            width: w,
            height: h,
            labels,
            count,
        },
        count,
    )
}

/// Exact pixel counts per resolved label.
pub fn component_sizes(labels: &LabelImage) -> ComponentSizeTable {
    let mut sizes = vec![0usize; labels.count];
    for &label in &labels.labels {
        if label != 0 {
            sizes[label as usize - 1] += 1;
        }
    }
    ComponentSizeTable { sizes }
}

/// Mask of the maximal-size component; ties go to the smallest label
/// (first appearance in scan order).
pub fn largest_component(labels: &LabelImage, sizes: &ComponentSizeTable) -> Result<BinaryMask> {
    if labels.count == 0 {
        return Err(Error::NoForeground);
    }
    debug_assert_eq!(labels.count, sizes.len());
    let mut best_label = 1u32;
    let mut best_size = sizes.size_of(1);
    for label in 2..=labels.count as u32 {
        let size = sizes.size_of(label);
        if size > best_size {
            best_size = size;
            best_label = label;
        }
    }
    let bits = labels
        .labels
        .iter()
        .map(|&l| (l == best_label) as u8)
        .collect();
    BinaryMask::new(labels.width, labels.height, bits)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::reference;

    fn mask_from_rows(rows: &[&[u8]]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        BinaryMask::new(w, h, rows.concat()).unwrap()
    }

    #[test]
    fn empty_mask_yields_zero_components() {
        let (labels, count) = label_components(&BinaryMask::zeros(4, 3));
        assert_eq!(count, 0);
        assert!(labels.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn disjoint_bars_are_numbered_in_scan_order() {
        let mask = mask_from_rows(&[&[1, 1, 0, 0], &[0, 0, 0, 0], &[0, 0, 1, 1], &[0, 0, 0, 0]]);
        let (labels, count) = label_components(&mask);
        assert_eq!(count, 2);
        assert_eq!(labels.get(0, 0), 1);
        assert_eq!(labels.get(1, 0), 1);
        assert_eq!(labels.get(2, 2), 2);
        assert_eq!(labels.get(3, 2), 2);
    }

    #[test]
    fn u_shape_merges_through_equivalence_table() {
        // Two vertical arms joined by the bottom row: the arms receive
        // distinct provisional labels that the table must merge.
        let mask = mask_from_rows(&[&[1, 0, 1], &[1, 0, 1], &[1, 1, 1]]);
        let (labels, count) = label_components(&mask);
        assert_eq!(count, 1);
        assert!(labels
            .labels()
            .iter()
            .zip(mask.bits())
            .all(|(&l, &b)| (l == 1) == (b == 1)));
    }

    #[test]
    fn labels_are_dense_and_match_flood_fill_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for case in 0..200 {
            let w = rng.random_range(4..=48);
            let h = rng.random_range(4..=48);
            let density = 0.1 + 0.8 * (case as f64 / 200.0);
            let mask = BinaryMask::from_fn(w, h, |_, _| rng.random_bool(density));
            let (labels, count) = label_components(&mask);

            let mut seen = vec![false; count + 1];
            for &l in labels.labels() {
                assert!((l as usize) <= count);
                seen[l as usize] = true;
            }
            assert!(seen.iter().skip(1).all(|&s| s), "labels must have no gaps");

            let (oracle, oracle_count) = reference::flood_fill_labels(&mask);
            assert_eq!(count, oracle_count);
            assert!(reference::partitions_equal(labels.labels(), &oracle));
            // Both schemes number components by first appearance in scan
            // order, so the label images agree exactly.
            assert_eq!(labels.labels(), &oracle[..]);
        }
    }

    #[test]
    fn labeling_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mask = BinaryMask::from_fn(33, 21, |_, _| rng.random_bool(0.5));
        let (a, _) = label_components(&mask);
        let (b, _) = label_components(&mask);
        assert_eq!(a, b);
    }

    #[test]
    fn sizes_of_empty_labeling_is_empty() {
        let (labels, _) = label_components(&BinaryMask::zeros(3, 3));
        assert!(component_sizes(&labels).is_empty());
    }

    #[test]
    fn sizes_count_exact_pixels() {
        let mask = mask_from_rows(&[
            &[1, 1, 1, 0, 0, 0, 0],
            &[0, 0, 0, 0, 1, 1, 1],
            &[0, 0, 0, 0, 1, 1, 1],
            &[0, 0, 0, 0, 1, 0, 0],
        ]);
        let (labels, count) = label_components(&mask);
        assert_eq!(count, 2);
        let sizes = component_sizes(&labels);
        assert_eq!(sizes.sizes(), &[3, 7]);
    }

    #[test]
    fn sizes_conserve_foreground_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..500 {
            let w = rng.random_range(2..=32);
            let h = rng.random_range(2..=32);
            let mask = BinaryMask::from_fn(w, h, |_, _| rng.random_bool(0.5));
            let (labels, _) = label_components(&mask);
            assert_eq!(component_sizes(&labels).total(), mask.count_ones());
        }
    }

    #[test]
    fn largest_component_selects_by_size() {
        let mask = mask_from_rows(&[
            &[1, 1, 1, 0, 0, 0, 0],
            &[0, 0, 0, 0, 1, 1, 1],
            &[0, 0, 0, 0, 1, 1, 1],
            &[0, 0, 0, 0, 1, 0, 0],
        ]);
        let (labels, _) = label_components(&mask);
        let sizes = component_sizes(&labels);
        let gcc = largest_component(&labels, &sizes).unwrap();
        assert_eq!(gcc.count_ones(), 7);
        assert!(gcc.get(4, 1) && !gcc.get(0, 0));
    }

    #[test]
    fn single_component_is_returned_whole() {
        let mask = mask_from_rows(&[&[0, 1, 0], &[1, 1, 1]]);
        let (labels, _) = label_components(&mask);
        let sizes = component_sizes(&labels);
        assert_eq!(largest_component(&labels, &sizes).unwrap(), mask);
    }

    #[test]
    fn size_ties_break_to_smallest_label() {
        let mask = mask_from_rows(&[&[1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 1]]);
        let (labels, _) = label_components(&mask);
        let sizes = component_sizes(&labels);
        assert_eq!(sizes.sizes(), &[5, 5]);
        let gcc = largest_component(&labels, &sizes).unwrap();
        assert!(gcc.get(0, 0) && !gcc.get(6, 0));
    }

    #[test]
    fn empty_mask_has_no_largest_component() {
        let (labels, _) = label_components(&BinaryMask::zeros(2, 2));
        let sizes = component_sizes(&labels);
        assert!(matches!(
            largest_component(&labels, &sizes),
            Err(Error::NoForeground)
        ));
    }

    #[test]
    fn gcc_output_is_a_single_connected_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let mask = BinaryMask::from_fn(24, 24, |_, _| rng.random_bool(0.45));
            if mask.count_ones() == 0 {
                continue;
            }
            let (labels, _) = label_components(&mask);
            let sizes = component_sizes(&labels);
            let gcc = largest_component(&labels, &sizes).unwrap();
            assert!(gcc.is_subset_of(&mask));
            let (_, n) = reference::flood_fill_labels(&gcc);
            assert_eq!(n, 1);
        }
    }

    #[test]
    fn union_find_roots_are_minimal() {
        let mut table = EquivalenceTable::new();
        for _ in 0..5 {
            table.make_label();
        }
        table.union(4, 2);
        assert_eq!(table.find(4), 2);
        table.union(5, 4);
        assert_eq!(table.find(5), 2);
        table.union(2, 1);
        for label in [1, 2, 4, 5] {
            let root = table.find(label);
            assert_eq!(root, 1);
            assert_eq!(table.find(root), root);
        }
        assert_eq!(table.find(3), 3);
    }
}
