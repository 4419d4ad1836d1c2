//! Keyword relevance matching and stop-keyword filtering.

use std::path::Path;

use super::corpus::TweetRecord;
use super::lexicon::KeywordList;
use crate::error::{Error, Result};
use crate::text;

/// True iff any phrase is a substring of the normalized text. Matching is
/// on raw substrings so non-word entries such as `https://` work.
pub fn keyword_match(text: &str, keywords: &KeywordList) -> bool {
    let t = text::normalize(text);
    keywords.phrases().iter().any(|p| t.contains(p.as_str()))
}

/// Splits records into `(kept, removed)`; a record is removed iff it
/// matches the stop list. Both halves keep input order.
pub fn stop_filter(records: Vec<TweetRecord>, stop: &KeywordList) -> (Vec<TweetRecord>, Vec<TweetRecord>) {
    records.into_iter().partition(|r| !keyword_match(&r.text, stop))
}

/// Per-stage counts, written as `stage,kept,removed`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub rows: Vec<(String, usize, usize)>,
}

impl FilterReport {
    pub fn push(&mut self, stage: &str, kept: usize, removed: usize) {
        self.rows.push((stage.to_string(), kept, removed));
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("stage,kept,removed\n");
        for (stage, k, r) in &self.rows {
            s.push_str(&format!("{stage},{k},{r}\n"));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::lexicon::KeywordKind;

    fn rec(id: &str, text: &str) -> TweetRecord {
        TweetRecord {
            id: id.into(),
            text: text.into(),
            followers: 0,
            likes: 0,
            replies: 0,
            retweets: 0,
            sentiment: None,
            polarity: None,
            subjectivity: None,
            label: None,
        }
    }

    #[test]
    fn keyword_examples() {
        let k = KeywordList::default_collection();
        assert!(keyword_match("Thinking about SUICIDE tonight", &k));
        assert!(!keyword_match("lovely weather today", &k));
        assert!(keyword_match("all the ways   to\n die", &k));
        assert!(keyword_match("دیگه به خودکشی فکر میکنم", &k));
    }

    #[test]
    fn stop_examples() {
        let stop = KeywordList::default_stop();
        let recs = vec![
            rec("a", "read https://example.com suicide"),
            rec("b", "another suicide attack downtown"),
            rec("c", "i think about suicide"),
            rec("d", "old link http://x.org"),
        ];
        let (kept, removed) = stop_filter(recs, &stop);
        assert_eq!(kept.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["c"]);
        assert_eq!(removed.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["a", "b", "d"]);
    }

    #[test]
    fn partition_is_exhaustive_and_ordered() {
        let stop = KeywordList::new(["x"], KeywordKind::Stop).unwrap();
        let recs: Vec<_> = ["ax", "b", "xc", "d", "e"].iter().map(|t| rec(t, t)).collect();
        let (kept, removed) = stop_filter(recs.clone(), &stop);
        assert_eq!(kept.len() + removed.len(), recs.len());
        let ids = |v: &[TweetRecord]| v.iter().map(|r| r.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&kept), ["b", "d", "e"]);
        assert_eq!(ids(&removed), ["ax", "xc"]);
    }

    #[test]
    fn report_csv() {
        let mut r = FilterReport::default();
        r.push("stop", 0, 0);
        assert_eq!(r.to_csv(), "stage,kept,removed\nstop,0,0\n");
    }
}
