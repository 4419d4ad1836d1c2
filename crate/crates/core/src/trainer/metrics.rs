use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::Label;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassScores {
    /// Scores with a zero denominator are reported as 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassScores { precision, recall, f1 }
    }
}

/// Confusion counts with `positive` as the positive class, plus
/// per-class scores where each class is scored as its own positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    pub positive: ClassScores,
    pub negative: ClassScores,
}

impl MetricsReport {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Result<Self> {
        let total = tp + fp + tn + fn_;
        if total == 0 {
            return Err(Error::InvalidArgument("metrics need at least one example".into()));
        }
        Ok(MetricsReport {
            tp,
            fp,
            tn,
            fn_,
            accuracy: (tp + tn) as f64 / total as f64,
            positive: ClassScores::from_counts(tp, fp, fn_),
            negative: ClassScores::from_counts(tn, fn_, fp),
        })
    }

    /// From `(predicted, actual)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Result<Self> {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (pred, actual) in pairs {
            match (pred, actual) {
                (Label::Positive, Label::Positive) => tp += 1,
                (Label::Positive, Label::Negative) => fp += 1,
                (Label::Negative, Label::Negative) => tn += 1,
                (Label::Negative, Label::Positive) => fn_ += 1,
            }
        }
        Self::from_counts(tp, fp, tn, fn_)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn class(&self, label: Label) -> ClassScores {
        match label {
            Label::Positive => self.positive,
            Label::Negative => self.negative,
        }
    }
}

pub const METRICS_HEADER: [&str; 6] = ["model", "class", "precision", "recall", "f1", "accuracy"];

/// Appends one row per class for each named report.
pub fn write_metrics_csv<W: Write>(out: W, reports: &[(&str, &MetricsReport)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for (name, r) in reports {
        for label in [Label::Positive, Label::Negative] {
            let s = r.class(label);
            w.write_record([
                name.to_string(),
                label.to_string(),
                s.precision.to_string(),
                s.recall.to_string(),
                s.f1.to_string(),
                r.accuracy.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<metrics>", e))
}

pub fn metrics_csv(reports: &[(&str, &MetricsReport)]) -> String {
    let mut buf = Vec::new();
    write_metrics_csv(&mut buf, reports).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_case() {
        let r = MetricsReport::from_counts(3, 1, 4, 2).unwrap();
        assert_eq!(r.positive.precision, 0.75);
        assert_eq!(r.positive.recall, 0.6);
        assert!((r.positive.f1 - 2.0 * 0.75 * 0.6 / 1.35).abs() < 1e-15);
        assert!((r.positive.f1 - 0.6667).abs() < 1e-4);
        assert_eq!(r.accuracy, 0.7);
    }

    #[test]
    fn perfect_predictions() {
        let pairs = [Label::Positive, Label::Negative, Label::Positive].map(|l| (l, l));
        let r = MetricsReport::from_pairs(pairs).unwrap();
        assert_eq!(r.accuracy, 1.0);
        for c in [r.positive, r.negative] {
            assert_eq!((c.precision, c.recall, c.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn constant_predictor_on_balanced_set() {
        let pairs = (0..10).map(|i| (Label::Positive, Label::from_bool(i % 2 == 0)));
        let r = MetricsReport::from_pairs(pairs).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!((r.positive.recall, r.positive.precision), (1.0, 0.5));
        assert_eq!(r.negative, ClassScores::default());
    }

    #[test]
    fn empty_rejected() {
        assert!(MetricsReport::from_pairs([]).is_err());
    }

    #[test]
    fn csv_layout() {
        let r = MetricsReport::from_counts(3, 1, 4, 2).unwrap();
        let s = metrics_csv(&[("m", &r)]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "model,class,precision,recall,f1,accuracy");
        assert!(lines[1].starts_with("m,positive,0.75,0.6,"));
        assert_eq!(lines.len(), 3);
        assert!(!s.contains('\r'));
    }
}
