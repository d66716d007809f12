//! Binary classification evaluation: confusion counts and the
//! precision / recall / F1 / accuracy quartet, with readmission as the
//! positive class.
//!
//! Reports carry full-precision values; [`round3`] reproduces the
//! three-decimal presentation used in result tables.

use alloc::string::String;

use crate::math;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("{0}")]
    InvalidArgument(String),
}

/// Counts of prediction outcomes. `true_pos` counts correctly predicted
/// readmissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    /// Derives the metric quartet. Undefined ratios (0/0) are reported as
    /// 0 with the `degenerate` flag set instead of NaN.
    pub fn report(&self) -> MetricReport {
        let mut degenerate = false;
        let mut ratio = |num: u64, den: u64| -> f64 {
            if den == 0 {
                degenerate = true;
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(self.true_pos, self.true_pos + self.false_pos);
        let recall = ratio(self.true_pos, self.true_pos + self.false_neg);
        let accuracy = ratio(self.true_pos + self.true_neg, self.total());
        let f1 = if precision + recall == 0.0 {
            degenerate = true;
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        MetricReport {
            precision,
            recall,
            f1,
            accuracy,
            degenerate,
            counts: *self,
        }
    }
}

/// The evaluation quartet plus the counts it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Set when any ratio was 0/0 and reported as 0.
    pub degenerate: bool,
    pub counts: ConfusionMatrix,
}

/// Tallies predictions against true labels.
pub fn confusion(predicted: &[bool], actual: &[bool]) -> Result<ConfusionMatrix, MetricsError> {
    if predicted.is_empty() {
        return Err(MetricsError::InvalidArgument(String::from(
            "confusion matrix needs at least one sample",
        )));
    }
    if predicted.len() != actual.len() {
        return Err(MetricsError::InvalidArgument(String::from(
            "predicted and actual label lists differ in length",
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p, a) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_pos += 1,
            (false, true) => cm.false_neg += 1,
            (false, false) => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_of(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Rounds to three decimals, halves away from zero.
pub fn round3(value: f64) -> f64 {
    math::round(value * 1000.0) / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions_have_no_errors() {
        let truths = vec![true, false, true, false];
        let cm = confusion(&truths, &truths).unwrap();
        assert_eq!(cm.false_pos, 0);
        assert_eq!(cm.false_neg, 0);
        assert_eq!(cm.true_pos, 2);
        assert_eq!(cm.true_neg, 2);
    }

    #[test]
    fn all_positive_predictor_has_no_negative_outcomes() {
        let preds = vec![true; 6];
        let truths = vec![true, true, true, false, false, false];
        let cm = confusion(&preds, &truths).unwrap();
        assert_eq!(cm.false_neg, 0);
        assert_eq!(cm.true_neg, 0);
        assert_eq!(cm.true_pos, 3);
        assert_eq!(cm.false_pos, 3);
    }

    #[test]
    fn swapping_predictions_exchanges_roles() {
        let preds = vec![true, true, false, false];
        let truths = vec![true, false, true, false];
        let cm = confusion(&preds, &truths).unwrap();
        let flipped: Vec<bool> = preds.iter().map(|p| !p).collect();
        let swapped = confusion(&flipped, &truths).unwrap();
        assert_eq!(cm.true_pos, swapped.false_neg);
        assert_eq!(cm.false_pos, swapped.true_neg);
        assert_eq!(cm.false_neg, swapped.true_pos);
        assert_eq!(cm.true_neg, swapped.false_pos);
    }

    #[test]
    fn confusion_rejects_bad_inputs() {
        assert!(confusion(&[], &[]).is_err());
        assert!(confusion(&[true], &[true, false]).is_err());
    }

    #[test]
    fn report_computes_the_quartet() {
        let cm = ConfusionMatrix {
            true_pos: 3,
            false_pos: 1,
            false_neg: 2,
            true_neg: 4,
        };
        let r = cm.report();
        assert!((r.precision - 0.75).abs() < 1e-15);
        assert!((r.recall - 0.6).abs() < 1e-15);
        assert!((r.f1 - 2.0 * 0.75 * 0.6 / 1.35).abs() < 1e-15);
        assert!((r.accuracy - 0.7).abs() < 1e-15);
        assert!(!r.degenerate);
    }

    #[test]
    fn zero_over_zero_reports_zero_and_flags() {
        let cm = ConfusionMatrix {
            true_pos: 0,
            false_pos: 0,
            false_neg: 2,
            true_neg: 3,
        };
        let r = cm.report();
        assert_eq!(r.precision, 0.0);
        assert_eq!(r.f1, 0.0);
        assert!(r.degenerate);
    }

    #[test]
    fn published_f1_values_follow_from_their_precision_recall_pairs() {
        let rows = [
            (0.759, 0.754, 0.756),
            (0.720, 0.633, 0.674),
            (0.698, 0.771, 0.733),
            (0.690, 0.625, 0.656),
        ];
        for (p, r, f1) in rows {
            assert!((round3(f1_of(p, r)) - f1).abs() < 1e-12);
        }
    }

    #[test]
    fn all_positive_predictor_on_balanced_set_scores_half_accuracy() {
        let preds = vec![true; 100];
        let truths: Vec<bool> = (0..100).map(|i| i < 50).collect();
        let r = confusion(&preds, &truths).unwrap().report();
        assert_eq!(r.accuracy, 0.5);
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round3(0.0625), 0.063);
        assert_eq!(round3(-0.0625), -0.063);
        assert_eq!(round3(0.7336), 0.734);
        assert_eq!(round3(0.7334), 0.733);
    }

    proptest! {
        #[test]
        fn f1_lies_between_precision_and_recall(
            tp in 0u64..200,
            fp in 0u64..200,
            fn_ in 0u64..200,
            tn in 0u64..200,
        ) {
            let cm = ConfusionMatrix {
                true_pos: tp,
                false_pos: fp,
                false_neg: fn_,
                true_neg: tn,
            };
            prop_assume!(cm.total() > 0);
            let r = cm.report();
            if !r.degenerate {
                let lo = r.precision.min(r.recall);
                let hi = r.precision.max(r.recall);
                prop_assert!(r.f1 >= lo - 1e-12 && r.f1 <= hi + 1e-12);
            }
            prop_assert!(r.accuracy >= 0.0 && r.accuracy <= 1.0);
        }
    }
}
