//! Corpus ingestion, filtering, annotation, featurization and splitting.

mod annotate;
mod corpus;
mod features;
mod filter;
mod lexicon;
mod split;
mod synth;

pub use annotate::{Annotator, Reason};
pub use corpus::{load_corpus, parse_corpus, write_jsonl, CorpusLoad, TweetRecord, MAX_BAD_LINE_FRACTION};
pub use features::{featurize, lexicon_sentiment, resolve_features, NormStats, SENTIMENT_DEAD_ZONE};
pub use filter::{keyword_match, stop_filter, FilterReport};
pub use lexicon::{
    KeywordKind, KeywordList, Lexicons, SentimentLexicon, WordSet, DEFAULT_FIRST_PERSON, DEFAULT_KEYWORDS,
    DEFAULT_NEGATORS, DEFAULT_SENTIMENT, DEFAULT_STOP, DEFAULT_THIRD_PERSON,
};
pub use split::split;
pub use synth::{synth_corpus, SignalMode, SynthSpec, ANCHOR};

use serde::Serialize;

use crate::encoder::{pad_or_truncate, Vocabulary};
use crate::error::{Error, Result};
use crate::fusion::Label;
use crate::ndtensor::Tensor;

/// Model-ready example.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedExample {
    /// Exactly `seq_len` ids.
    pub token_ids: Vec<usize>,
    /// Normalized `[7]` metadata.
    pub features: Tensor,
    pub label: Label,
}

/// Output of [`prepare`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Prepared {
    /// Records that passed both filters, with sentiment fields filled in
    /// and a label attached, in input order.
    pub records: Vec<TweetRecord>,
    /// Records removed by the stop list.
    pub stopped: Vec<TweetRecord>,
    pub report: FilterReport,
}

/// Keyword collection, stop filtering and annotation. Records that
/// already carry a label keep it.
pub fn prepare(records: Vec<TweetRecord>, annotator: &Annotator, stop: &KeywordList) -> Prepared {
    let mut report = FilterReport::default();
    let total = records.len();
    let relevant: Vec<TweetRecord> = records
        .into_iter()
        .filter(|r| keyword_match(&r.text, &annotator.keywords))
        .collect();
    report.push("keyword", relevant.len(), total - relevant.len());
    let (kept, stopped) = stop_filter(relevant, stop);
    report.push("stop", kept.len(), stopped.len());

    let records = kept
        .into_iter()
        .map(|r| {
            let label = r.label.unwrap_or_else(|| annotator.annotate(&r));
            let f = resolve_features(&r, &annotator.lexicons.sentiment);
            TweetRecord {
                sentiment: Some(f.sentiment),
                polarity: Some(f.polarity),
                subjectivity: Some(f.subjectivity),
                label: Some(label),
                ..r
            }
        })
        .collect();
    Prepared { records, stopped, report }
}

/// A prepared record plus its normalized feature vector, one JSON line of
/// the `prepare` output.
#[derive(Clone, Debug, Serialize)]
pub struct PreparedLine<'a> {
    #[serde(flatten)]
    pub record: &'a TweetRecord,
    pub features: Vec<f64>,
}

/// Tokenizes, pads and featurizes labelled records.
pub fn encode_examples(
    records: &[TweetRecord],
    vocab: &Vocabulary,
    stats: &NormStats,
    sentiment: &SentimentLexicon,
    seq_len: usize,
) -> Result<Vec<AnnotatedExample>> {
    records
        .iter()
        .map(|r| {
            let label = r
                .label
                .ok_or_else(|| Error::InvalidArgument(format!("record {:?} has no label", r.id)))?;
            Ok(AnnotatedExample {
                token_ids: pad_or_truncate(&vocab.encode(&r.text), seq_len)?,
                features: featurize(&resolve_features(r, sentiment), stats)?,
                label,
            })
        })
        .collect()
}

/// Vocabulary and count statistics fitted on a training set.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoding {
    pub vocab: Vocabulary,
    pub stats: NormStats,
}

impl Encoding {
    pub fn fit(records: &[TweetRecord], min_count: usize, sentiment: &SentimentLexicon) -> Self {
        let vocab = Vocabulary::build(records.iter().map(|r| r.text.as_str()), min_count);
        let feats: Vec<_> = records.iter().map(|r| resolve_features(r, sentiment)).collect();
        Encoding {
            vocab,
            stats: NormStats::fit(&feats),
        }
    }

    pub fn encode(
        &self,
        records: &[TweetRecord],
        seq_len: usize,
        sentiment: &SentimentLexicon,
    ) -> Result<Vec<AnnotatedExample>> {
        encode_examples(records, &self.vocab, &self.stats, sentiment, seq_len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, text: &str, label: Option<Label>) -> TweetRecord {
        TweetRecord {
            id: id.into(),
            text: text.into(),
            followers: 3,
            likes: 1,
            replies: 0,
            retweets: 0,
            sentiment: None,
            polarity: None,
            subjectivity: None,
            label,
        }
    }

    #[test]
    fn prepare_counts_and_labels() {
        let recs = vec![
            rec("1", "I will not commit suicide", None),
            rec("2", "lunch was great", None),
            rec("3", "suicide attack reported https://news", None),
            rec("4", "i feel hopeless, suicide is all i think of", None),
            rec("5", "suicide", Some(Label::Positive)),
        ];
        let p = prepare(recs, &Annotator::default(), &KeywordList::default_stop());
        assert_eq!(p.report.to_csv(), "stage,kept,removed\nkeyword,4,1\nstop,3,1\n");
        let got: Vec<(&str, Label)> = p.records.iter().map(|r| (r.id.as_str(), r.label.unwrap())).collect();
        assert_eq!(got, [("1", Label::Negative), ("4", Label::Positive), ("5", Label::Positive)]);
        assert!(p.records.iter().all(|r| r.has_sentiment()));
    }

    #[test]
    fn empty_corpus_report() {
        let p = prepare(vec![], &Annotator::default(), &KeywordList::default_stop());
        assert!(p.report.to_csv().ends_with("stop,0,0\n"));
    }

    #[test]
    fn prepared_line_flattens() {
        let r = rec("1", "x", Some(Label::Negative));
        let s = serde_json::to_string(&PreparedLine { record: &r, features: vec![0.5] }).unwrap();
        assert!(s.contains("\"label\":\"negative\"") && s.contains("\"features\":[0.5]"));
        assert_eq!(parse_corpus(&s).records, vec![r]);
    }

    #[test]
    fn encoding_fits_on_given_records_only() {
        let lex = SentimentLexicon::default();
        let train = [rec("1", "alpha beta", Some(Label::Positive)), rec("2", "beta", Some(Label::Negative))];
        let e = Encoding::fit(&train, 1, &lex);
        assert_eq!(e.vocab.len(), 4);
        assert_eq!(e.stats.mean[0], 4f64.ln());
        let ex = e.encode(&[rec("3", "gamma beta", Some(Label::Negative))], 3, &lex).unwrap();
        assert_eq!(ex[0].token_ids, [crate::encoder::UNK, e.vocab.id("beta"), crate::encoder::PAD]);
    }

    #[test]
    fn encode_requires_labels() {
        let v = Vocabulary::build(["a b"], 1);
        let lex = SentimentLexicon::default();
        let ok = encode_examples(&[rec("1", "a b c", Some(Label::Positive))], &v, &NormStats::default(), &lex, 5).unwrap();
        assert_eq!(ok[0].token_ids.len(), 5);
        assert_eq!(ok[0].features.shape(), [7]);
        assert!(encode_examples(&[rec("1", "a", None)], &v, &NormStats::default(), &lex, 5).is_err());
    }
}
