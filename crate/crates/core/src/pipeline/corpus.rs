//! JSON Lines corpus archives.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{FeatureVector, Label};

/// Fraction of unparseable lines above which loading fails outright.
pub const MAX_BAD_LINE_FRACTION: f64 = 0.10;

/// One archived post.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub followers: u64,
    pub likes: u64,
    pub replies: u64,
    pub retweets: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subjectivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl TweetRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.text.trim().is_empty() {
            return bad("text is empty".into());
        }
        if let Some(s) = self.sentiment {
            if !matches!(s, -1..=1) {
                return bad(format!("sentiment {s} not in {{-1, 0, 1}}"));
            }
        }
        if let Some(p) = self.polarity {
            if !(-1.0..=1.0).contains(&p) {
                return bad(format!("polarity {p} outside [-1, 1]"));
            }
        }
        if let Some(s) = self.subjectivity {
            if !(0.0..=1.0).contains(&s) {
                return bad(format!("subjectivity {s} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Metadata with any missing sentiment field taken from `fallback`.
    pub fn feature_vector(&self, fallback: (i8, f64, f64)) -> FeatureVector {
        FeatureVector {
            sentiment: self.sentiment.unwrap_or(fallback.0),
            polarity: self.polarity.unwrap_or(fallback.1),
            subjectivity: self.subjectivity.unwrap_or(fallback.2),
            followers: self.followers,
            likes: self.likes,
            replies: self.replies,
            retweets: self.retweets,
        }
    }

    pub fn has_sentiment(&self) -> bool {
        self.sentiment.is_some() && self.polarity.is_some() && self.subjectivity.is_some()
    }
}

/// A parsed corpus plus the lines that were skipped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusLoad {
    pub records: Vec<TweetRecord>,
    /// `(1-based line number, reason)` for every rejected line.
    pub rejected: Vec<(usize, String)>,
}

pub fn parse_corpus(text: &str) -> CorpusLoad {
    let mut out = CorpusLoad::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<TweetRecord>(line)
            .map_err(|e| e.to_string())
            .and_then(|r| r.validate().map(|_| r).map_err(|e| e.to_string()));
        match parsed {
            Ok(r) => out.records.push(r),
            Err(e) => out.rejected.push((i + 1, e)),
        }
    }
    out
}

/// Reads a JSON Lines archive. Bad lines are collected in
/// [`CorpusLoad::rejected`] unless they exceed
/// [`MAX_BAD_LINE_FRACTION`] of all non-blank lines.
pub fn load_corpus(path: &Path) -> Result<CorpusLoad> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let load = parse_corpus(&text);
    let total = load.records.len() + load.rejected.len();
    if total > 0 && load.rejected.len() as f64 > MAX_BAD_LINE_FRACTION * total as f64 {
        let (first_line, first_error) = load.rejected[0].clone();
        return Err(Error::CorpusSchema {
            path: path.to_path_buf(),
            bad: load.rejected.len(),
            total,
            first_line,
            first_error,
        });
    }
    Ok(load)
}

/// Writes one JSON object per line, LF-terminated.
pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}
