//! Deterministic synthetic corpora with a known label signal.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use super::corpus::TweetRecord;
use crate::error::{Error, Result};
use crate::fusion::Label;

/// Where the label can be read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalMode {
    /// Class-specific tokens; metadata drawn identically for both classes.
    Text,
    /// Class-conditional metadata; text drawn identically for both classes.
    Features,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub records: usize,
    pub mode: SignalMode,
    /// Number of shared filler tokens `w0..`.
    pub vocab_size: usize,
    /// Filler tokens per text, inclusive bounds.
    pub min_len: usize,
    pub max_len: usize,
    /// Probability that a text carries a class token (text signal only).
    pub plant_rate: f64,
    /// Distinct class tokens per class (`pos0..`, `neg0..`).
    pub class_tokens: usize,
    pub positive_fraction: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            records: 1000,
            mode: SignalMode::Text,
            vocab_size: 200,
            min_len: 4,
            max_len: 12,
            plant_rate: 1.0,
            class_tokens: 5,
            positive_fraction: 0.5,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidArgument(format!("synthetic corpus: {m}")));
        if self.records < 4 {
            return fail("need at least 4 records");
        }
        if self.vocab_size == 0 || self.class_tokens == 0 {
            return fail("vocabulary sizes must be positive");
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return fail("need 1 <= min_len <= max_len");
        }
        if !(0.0..=1.0).contains(&self.plant_rate) {
            return fail("plant_rate outside [0, 1]");
        }
        let pos = self.positives();
        if pos < 2 || self.records - pos < 2 {
            return fail("each class needs at least 2 records");
        }
        Ok(())
    }

    pub fn positives(&self) -> usize {
        (self.positive_fraction * self.records as f64).round() as usize
    }
}

/// Marker token present in every synthetic text, so the whole corpus
/// passes keyword collection.
pub const ANCHOR: &str = "suicide";

struct Meta {
    polarity: Normal<f64>,
    subjectivity: Normal<f64>,
    replies: LogNormal<f64>,
    likes: LogNormal<f64>,
}

impl Meta {
    fn new(label: Option<Label>) -> Self {
        let n = |m, s| Normal::new(m, s).expect("valid normal");
        let ln = |m, s| LogNormal::new(m, s).expect("valid lognormal");
        match label {
            Some(Label::Positive) => Meta {
                polarity: n(-0.5, 0.3),
                subjectivity: n(0.75, 0.15),
                replies: ln(2.0, 0.6),
                likes: ln(1.5, 0.8),
            },
            Some(Label::Negative) => Meta {
                polarity: n(0.3, 0.35),
                subjectivity: n(0.4, 0.2),
                replies: ln(0.5, 0.6),
                likes: ln(1.5, 0.8),
            },
            None => Meta {
                polarity: n(-0.1, 0.45),
                subjectivity: n(0.55, 0.25),
                replies: ln(1.2, 0.8),
                likes: ln(1.5, 0.8),
            },
        }
    }
}

/// Generates `spec.records` labelled records. Exactly
/// `round(positive_fraction * records)` are positive; output order is
/// shuffled. Same spec and seed give the same corpus.
pub fn synth_corpus(spec: &SynthSpec, seed: u64) -> Result<Vec<TweetRecord>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos = spec.positives();
    let mut labels: Vec<Label> = (0..spec.records)
        .map(|i| Label::from_bool(i < pos))
        .collect();
    labels.shuffle(&mut rng);

    let text_signal = matches!(spec.mode, SignalMode::Text | SignalMode::Both);
    let feature_signal = matches!(spec.mode, SignalMode::Features | SignalMode::Both);
    let shared = Meta::new(None);
    let by_class = [Meta::new(Some(Label::Negative)), Meta::new(Some(Label::Positive))];
    let followers = LogNormal::new(4.0, 1.5).expect("valid lognormal");
    let retweets = LogNormal::new(0.3, 0.7).expect("valid lognormal");

    let mut out = Vec::with_capacity(spec.records);
    for (i, &label) in labels.iter().enumerate() {
        let len = rng.gen_range(spec.min_len..=spec.max_len);
        let mut words: Vec<String> = (0..len)
            .map(|_| format!("w{}", rng.gen_range(0..spec.vocab_size)))
            .collect();
        words.insert(rng.gen_range(0..=words.len()), ANCHOR.to_string());
        if text_signal && rng.gen_bool(spec.plant_rate) {
            let prefix = if label == Label::Positive { "pos" } else { "neg" };
            let tok = format!("{prefix}{}", rng.gen_range(0..spec.class_tokens));
            words.insert(rng.gen_range(0..=words.len()), tok);
        }

        let m = if feature_signal { &by_class[label as usize] } else { &shared };
        let polarity = m.polarity.sample(&mut rng).clamp(-1.0, 1.0);
        let subjectivity = m.subjectivity.sample(&mut rng).clamp(0.0, 1.0);
        let sentiment = if polarity.abs() < 0.1 { 0 } else { polarity.signum() as i8 };
        let count = |x: f64| x.floor() as u64;
        out.push(TweetRecord {
            id: format!("s{i:05}"),
            text: words.join(" "),
            followers: count(followers.sample(&mut rng)),
            likes: count(m.likes.sample(&mut rng)),
            replies: count(m.replies.sample(&mut rng)),
            retweets: count(retweets.sample(&mut rng)),
            sentiment: Some(sentiment),
            polarity: Some(polarity),
            subjectivity: Some(subjectivity),
            label: Some(label),
        });
    }
    Ok(out)
}
