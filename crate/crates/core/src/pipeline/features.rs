//! Lexicon sentiment fallback and metadata normalization.

use super::corpus::TweetRecord;
use super::lexicon::SentimentLexicon;
use crate::error::{Error, Result};
use crate::fusion::{FeatureVector, FEATURE_DIM};
use crate::ndtensor::Tensor;
use crate::text;

/// Polarity magnitudes below this map to neutral sentiment.
pub const SENTIMENT_DEAD_ZONE: f64 = 0.1;

/// `(Se, polarity, subjectivity)` from the mean weights of matched words.
/// No matches gives `(0, 0, 0)`.
pub fn lexicon_sentiment(raw: &str, lexicon: &SentimentLexicon) -> (i8, f64, f64) {
    let hits: Vec<(f64, f64)> = text::tokenize(raw).iter().filter_map(|t| lexicon.get(t)).collect();
    if hits.is_empty() {
        return (0, 0.0, 0.0);
    }
    let n = hits.len() as f64;
    let pol = (hits.iter().map(|h| h.0).sum::<f64>() / n).clamp(-1.0, 1.0);
    let subj = (hits.iter().map(|h| h.1).sum::<f64>() / n).clamp(0.0, 1.0);
    let se = if pol.abs() < SENTIMENT_DEAD_ZONE { 0 } else if pol > 0.0 { 1 } else { -1 };
    (se, pol, subj)
}

/// Record metadata, with each missing sentiment field filled from the
/// lexicon.
pub fn resolve_features(record: &TweetRecord, lexicon: &SentimentLexicon) -> FeatureVector {
    if record.has_sentiment() {
        return record.feature_vector((0, 0.0, 0.0));
    }
    record.feature_vector(lexicon_sentiment(&record.text, lexicon))
}

/// Mean and standard deviation of `log1p` counts, fitted on a corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct NormStats {
    pub mean: [f64; 4],
    pub std: [f64; 4],
}

impl Default for NormStats {
    fn default() -> Self {
        NormStats { mean: [0.0; 4], std: [1.0; 4] }
    }
}

impl NormStats {
    /// Population statistics. A zero spread is replaced by 1; an empty
    /// corpus gives the identity transform.
    pub fn fit<'a>(features: impl IntoIterator<Item = &'a FeatureVector>) -> Self {
        let logs: Vec<[f64; 4]> = features
            .into_iter()
            .map(|f| f.counts().map(|c| (c as f64).ln_1p()))
            .collect();
        if logs.is_empty() {
            return Self::default();
        }
        let n = logs.len() as f64;
        let mut s = Self::default();
        for j in 0..4 {
            let m = logs.iter().map(|l| l[j]).sum::<f64>() / n;
            let var = logs.iter().map(|l| (l[j] - m).powi(2)).sum::<f64>() / n;
            s.mean[j] = m;
            s.std[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        s
    }

    /// `[2, 4]`: means then standard deviations.
    pub fn to_tensor(&self) -> Tensor {
        Tensor::matrix(&[self.mean, self.std])
    }

    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        if t.shape() != [2, 4] {
            return Err(Error::Checkpoint(format!("normalization stats have shape {:?}", t.shape())));
        }
        let mut s = Self::default();
        s.mean.copy_from_slice(t.row(0));
        s.std.copy_from_slice(t.row(1));
        if s.std.iter().any(|&x| !(x > 0.0)) || !t.is_finite() {
            return Err(Error::Checkpoint("normalization stats are invalid".into()));
        }
        Ok(s)
    }
}

/// `[Se, p, s, z(log1p Fo), z(log1p L), z(log1p R), z(log1p Re)]`.
pub fn featurize(f: &FeatureVector, stats: &NormStats) -> Result<Tensor> {
    f.validate()?;
    let mut v = Vec::with_capacity(FEATURE_DIM);
    v.extend([f.sentiment as f64, f.polarity, f.subjectivity]);
    for (j, c) in f.counts().into_iter().enumerate() {
        v.push(((c as f64).ln_1p() - stats.mean[j]) / stats.std[j]);
    }
    Tensor::new(vec![FEATURE_DIM], v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> SentimentLexicon {
        SentimentLexicon::from_pairs([("hope", 0.8, 0.5), ("meh", 0.05, 0.2), ("sad", -0.6, 0.9)])
    }

    #[test]
    fn no_hits_is_neutral() {
        assert_eq!(lexicon_sentiment("nothing here", &lex()), (0, 0.0, 0.0));
    }

    #[test]
    fn single_positive_word() {
        let (se, p, s) = lexicon_sentiment("some HOPE", &lex());
        assert_eq!((se, p, s), (1, 0.8, 0.5));
    }

    #[test]
    fn dead_zone() {
        assert_eq!(lexicon_sentiment("meh meh", &lex()).0, 0);
        let (se, p, _) = lexicon_sentiment("sad hope", &lex());
        assert!((p - 0.1).abs() < 1e-12);
        assert_eq!(se, if p.abs() < SENTIMENT_DEAD_ZONE { 0 } else { 1 });
    }

    #[test]
    fn clipping_keeps_ranges() {
        let l = SentimentLexicon::from_pairs([("x", -3.0, 2.0)]);
        assert_eq!(lexicon_sentiment("x", &l), (-1, -1.0, 1.0));
    }

    #[test]
    fn featurize_log_counts() {
        let f = FeatureVector { likes: 99, ..Default::default() };
        let t = featurize(&f, &NormStats::default()).unwrap();
        assert_eq!(t.data()[0], 0.0);
        assert_eq!(t.data()[3], 0.0);
        assert!((t.data()[4] - 100f64.ln()).abs() < 1e-12);
        assert!((t.data()[4] - 4.60517).abs() < 1e-5);
    }

    #[test]
    fn stats_standardize() {
        let fs: Vec<FeatureVector> = [0u64, 9, 99]
            .iter()
            .map(|&c| FeatureVector { followers: c, ..Default::default() })
            .collect();
        let s = NormStats::fit(&fs);
        assert_eq!(s.std[1], 1.0);
        let z: Vec<f64> = fs.iter().map(|f| featurize(f, &s).unwrap().data()[3]).collect();
        let mean = z.iter().sum::<f64>() / 3.0;
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        assert_eq!(NormStats::from_tensor(&s.to_tensor()).unwrap(), s);
    }

    #[test]
    fn invalid_vector_rejected() {
        let f = FeatureVector { polarity: 1.5, ..Default::default() };
        assert!(featurize(&f, &NormStats::default()).is_err());
    }
}
