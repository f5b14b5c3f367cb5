//! Overlap metrics against expert masks and corpus-level evaluation
//! reports.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imgio::{BinaryMask, GrayImage};
use crate::pipeline::{run_liver_stage, PipelineConfig};

/// Dice threshold at or above which a segmentation counts as good.
pub const GOOD_DICE: f64 = 0.9;
/// Dice threshold at or above which a segmentation counts as average.
pub const AVERAGE_DICE: f64 = 0.7;

fn overlap_counts(a: &BinaryMask, b: &BinaryMask) -> Result<(usize, usize, usize)> {
    if !a.same_dimensions(b) {
        return Err(Error::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    let mut intersection = 0usize;
    let (mut count_a, mut count_b) = (0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        count_a += x as usize;
        count_b += y as usize;
        intersection += (x & y) as usize;
    }
    Ok((intersection, count_a, count_b))
}

/// Dice coefficient `2|A inter B| / (|A| + |B|)`; 1.0 when both masks
/// are empty.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let (intersection, count_a, count_b) = overlap_counts(a, b)?;
    if count_a + count_b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * intersection as f64 / (count_a + count_b) as f64)
}

/// Jaccard index `|A inter B| / |A union B|`; 1.0 when both masks are
/// empty.
pub fn jaccard(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let (intersection, count_a, count_b) = overlap_counts(a, b)?;
    let union = count_a + count_b - intersection;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(intersection as f64 / union as f64)
}

/// Qualitative bucket for one segmentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Good,
    Average,
    Failed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Good => "good",
            Verdict::Average => "average",
            Verdict::Failed => "failed",
        };
        f.write_str(s)
    }
}

fn verdict_for(dice: f64) -> Verdict {
    if dice >= GOOD_DICE {
        Verdict::Good
    } else if dice >= AVERAGE_DICE {
        Verdict::Average
    } else {
        Verdict::Failed
    }
}

/// One image paired with its expert mask.
#[derive(Clone, Debug)]
pub struct CorpusSample {
    pub id: String,
    pub image: GrayImage,
    pub truth: BinaryMask,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalRow {
    pub id: String,
    pub dice: f64,
    pub jaccard: f64,
    pub area_auto: usize,
    pub area_truth: usize,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalAggregate {
    pub mean_dice: f64,
    pub mean_jaccard: f64,
    /// Rows on which the pipeline found no liver at all (not rows that
    /// merely scored below the average cutoff).
    pub n_failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub aggregate: EvalAggregate,
}

impl EvalReport {
    /// CSV rendering: a header plus one row per image.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row).expect("rows serialize");
        }
        let bytes = writer.into_inner().expect("csv buffer");
        String::from_utf8(bytes).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        let mut body = serde_json::to_string_pretty(self).expect("report serializes");
        body.push('\n');
        body
    }
}

/// Runs the pipeline on every sample and scores it against the expert
/// mask. A sample on which no liver is found contributes a failed row
/// with zero scores; any other pipeline error aborts the evaluation.
pub fn evaluate_corpus(samples: &[CorpusSample], cfg: &PipelineConfig) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rows = Vec::with_capacity(samples.len());
    let mut n_failed = 0usize;
    for sample in samples {
        if sample.image.width() != sample.truth.width()
            || sample.image.height() != sample.truth.height()
        {
            return Err(Error::DimensionMismatch(
                sample.image.width(),
                sample.image.height(),
                sample.truth.width(),
                sample.truth.height(),
            ));
        }
        let row = match run_liver_stage(&sample.image, cfg)? {
            Some(found) => {
                let d = dice(&found.closed, &sample.truth)?;
                let j = jaccard(&found.closed, &sample.truth)?;
                EvalRow {
                    id: sample.id.clone(),
                    dice: d,
                    jaccard: j,
                    area_auto: found.closed.count_ones(),
                    area_truth: sample.truth.count_ones(),
                    verdict: verdict_for(d),
                }
            }
            None => {
                n_failed += 1;
                EvalRow {
                    id: sample.id.clone(),
                    dice: 0.0,
                    jaccard: 0.0,
                    area_auto: 0,
                    area_truth: sample.truth.count_ones(),
                    verdict: Verdict::Failed,
                }
            }
        };
        rows.push(row);
    }
    let n = rows.len() as f64;
    let aggregate = EvalAggregate {
        mean_dice: rows.iter().map(|r| r.dice).sum::<f64>() / n,
        mean_jaccard: rows.iter().map(|r| r.jaccard).sum::<f64>() / n,
        n_failed,
    };
    Ok(EvalReport { rows, aggregate })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::histogram::ThresholdPair;
    use crate::imgio::make_phantom;

    fn mask_of(bits: Vec<u8>, w: usize, h: usize) -> BinaryMask {
        BinaryMask::new(w, h, bits).unwrap()
    }

    #[test]
    fn dice_of_identical_masks_is_one() {
        let m = mask_of(vec![1, 0, 1, 1], 2, 2);
        assert_eq!(dice(&m, &m).unwrap(), 1.0);
    }

    #[test]
    fn dice_of_disjoint_masks_is_zero() {
        let a = mask_of(vec![1, 1, 0, 0], 2, 2);
        let b = mask_of(vec![0, 0, 1, 1], 2, 2);
        assert_eq!(dice(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn dice_counts_by_hand() {
        // |a| = 6, |b| = 4, overlap 2 -> 2*2/10 = 0.4.
        let a = mask_of(vec![1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0], 4, 3);
        let b = mask_of(vec![1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0], 4, 3);
        assert_eq!(dice(&a, &b).unwrap(), 0.4);
    }

    #[test]
    fn jaccard_counts_by_hand() {
        // intersection 2, union 8 -> 0.25.
        let a = mask_of(vec![1, 1, 1, 1, 1, 0, 0, 0, 0], 3, 3);
        let b = mask_of(vec![1, 1, 0, 0, 0, 1, 1, 1, 0], 3, 3);
        assert_eq!(jaccard(&a, &b).unwrap(), 0.25);
    }

    #[test]
    fn both_empty_masks_score_one() {
        let a = BinaryMask::zeros(4, 4);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        assert_eq!(jaccard(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn empty_truth_with_prediction_scores_zero() {
        let auto = mask_of(vec![1, 1, 0, 0], 2, 2);
        let truth = BinaryMask::zeros(2, 2);
        assert_eq!(dice(&auto, &truth).unwrap(), 0.0);
        assert_eq!(jaccard(&auto, &truth).unwrap(), 0.0);
    }

    #[test]
    fn metrics_reject_mismatched_dimensions() {
        let a = BinaryMask::zeros(2, 2);
        let b = BinaryMask::zeros(3, 2);
        assert!(matches!(dice(&a, &b), Err(Error::DimensionMismatch(..))));
        assert!(matches!(jaccard(&a, &b), Err(Error::DimensionMismatch(..))));
    }

    #[test]
    fn jaccard_relates_to_dice_algebraically() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for _ in 0..200 {
            let a = BinaryMask::from_fn(12, 12, |_, _| rng.random_bool(0.5));
            let b = BinaryMask::from_fn(12, 12, |_, _| rng.random_bool(0.5));
            let d = dice(&a, &b).unwrap();
            let j = jaccard(&a, &b).unwrap();
            assert!((j - d / (2.0 - d)).abs() < 1e-12);
            assert!(j <= d + 1e-15);
            if d == 0.0 || d == 1.0 {
                assert_eq!(j, d);
            } else {
                assert!(j < d);
            }
            // Symmetry.
            assert_eq!(d, dice(&b, &a).unwrap());
            assert_eq!(j, jaccard(&b, &a).unwrap());
        }
    }

    #[test]
    fn noise_free_phantom_corpus_scores_perfectly() {
        let band = ThresholdPair::new(90, 150).unwrap();
        let samples: Vec<CorpusSample> = (0..10)
            .map(|seed| {
                let p = make_phantom(64, 64, seed, 0.0, band).unwrap();
                CorpusSample {
                    id: format!("p{seed}"),
                    image: p.image,
                    truth: p.truth,
                }
            })
            .collect();
        let report = evaluate_corpus(&samples, &PipelineConfig::default()).unwrap();
        assert_eq!(report.aggregate.mean_dice, 1.0);
        assert_eq!(report.aggregate.n_failed, 0);
        assert!(report.rows.iter().all(|r| r.verdict == Verdict::Good));
    }

    #[test]
    fn blank_corpus_counts_as_failed() {
        let samples = vec![CorpusSample {
            id: "blank".into(),
            image: GrayImage::constant(64, 64, 255, 0),
            truth: BinaryMask::zeros(64, 64),
        }];
        let report = evaluate_corpus(&samples, &PipelineConfig::default()).unwrap();
        assert_eq!(report.aggregate.n_failed, 1);
        assert_eq!(report.aggregate.mean_dice, 0.0);
        assert_eq!(report.rows[0].verdict, Verdict::Failed);
        assert_eq!(report.rows[0].area_auto, 0);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(matches!(
            evaluate_corpus(&[], &PipelineConfig::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn report_serialization_uses_exact_keys() {
        let band = ThresholdPair::new(90, 150).unwrap();
        let p = make_phantom(64, 64, 1, 0.0, band).unwrap();
        let samples = vec![CorpusSample {
            id: "one".into(),
            image: p.image,
            truth: p.truth,
        }];
        let report = evaluate_corpus(&samples, &PipelineConfig::default()).unwrap();

        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let row = &json["rows"][0];
        for key in [
            "id",
            "dice",
            "jaccard",
            "area_auto",
            "area_truth",
            "verdict",
        ] {
            assert!(row.get(key).is_some(), "missing row key {key}");
        }
        for key in ["mean_dice", "mean_jaccard", "n_failed"] {
            assert!(
                json["aggregate"].get(key).is_some(),
                "missing aggregate key {key}"
            );
        }
        assert_eq!(row["verdict"], "good");

        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "id,dice,jaccard,area_auto,area_truth,verdict"
        );
        assert_eq!(lines.count(), 1);
    }
}
