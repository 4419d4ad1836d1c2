//! Keyword lists and word lexicons loaded from plain-text files.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::text;

pub const DEFAULT_KEYWORDS: &str = include_str!("../../data/keywords.txt");
pub const DEFAULT_STOP: &str = include_str!("../../data/stop.txt");
pub const DEFAULT_NEGATORS: &str = include_str!("../../data/negators.txt");
pub const DEFAULT_FIRST_PERSON: &str = include_str!("../../data/first_person.txt");
pub const DEFAULT_THIRD_PERSON: &str = include_str!("../../data/third_person.txt");
pub const DEFAULT_SENTIMENT: &str = include_str!("../../data/sentiment.tsv");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeywordKind {
    Collection,
    Stop,
}

/// Lines of a lexicon file with comments and blank lines dropped.
fn entries(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Ordered, case-insensitively deduplicated phrases. Phrases are stored
/// normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct KeywordList {
    phrases: Vec<String>,
    kind: KeywordKind,
}

impl KeywordList {
    pub fn new<S: AsRef<str>>(phrases: impl IntoIterator<Item = S>, kind: KeywordKind) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in phrases {
            let n = text::normalize(p.as_ref());
            if !n.is_empty() && seen.insert(n.clone()) {
                out.push(n);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument(format!("{kind:?} keyword list is empty")));
        }
        Ok(KeywordList { phrases: out, kind })
    }

    pub fn parse(src: &str, kind: KeywordKind) -> Result<Self> {
        Self::new(entries(src).map(|(_, l)| l), kind)
    }

    pub fn load(path: &Path, kind: KeywordKind) -> Result<Self> {
        Self::parse(&read(path)?, kind)
    }

    pub fn default_collection() -> Self {
        Self::parse(DEFAULT_KEYWORDS, KeywordKind::Collection).expect("bundled keywords")
    }

    pub fn default_stop() -> Self {
        Self::parse(DEFAULT_STOP, KeywordKind::Stop).expect("bundled stop list")
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    pub fn kind(&self) -> KeywordKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

/// A set of single tokens (negators, pronouns).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordSet(HashSet<String>);

impl WordSet {
    pub fn parse(src: &str) -> Self {
        WordSet(entries(src).flat_map(|(_, l)| text::tokenize(l)).collect())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self::parse(&read(path)?))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Word to (polarity, subjectivity) weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SentimentLexicon(HashMap<String, (f64, f64)>);

impl SentimentLexicon {
    pub fn parse(src: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (line, l) in entries(src) {
            let bad = || Error::InvalidArgument(format!("sentiment lexicon line {line}: {l:?}"));
            let cols: Vec<&str> = l.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad());
            }
            let pol: f64 = cols[1].trim().parse().map_err(|_| bad())?;
            let subj: f64 = cols[2].trim().parse().map_err(|_| bad())?;
            if !pol.is_finite() || !subj.is_finite() {
                return Err(bad());
            }
            map.insert(text::normalize(cols[0]), (pol, subj));
        }
        Ok(SentimentLexicon(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64, f64)>) -> Self {
        SentimentLexicon(pairs.into_iter().map(|(w, p, s)| (w.into(), (p, s))).collect())
    }

    pub fn get(&self, token: &str) -> Option<(f64, f64)> {
        self.0.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Everything the annotator and the sentiment fallback consult.
#[derive(Clone, Debug, PartialEq)]
pub struct Lexicons {
    pub negators: WordSet,
    pub first_person: WordSet,
    pub third_person: WordSet,
    pub sentiment: SentimentLexicon,
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons {
            negators: WordSet::parse(DEFAULT_NEGATORS),
            first_person: WordSet::parse(DEFAULT_FIRST_PERSON),
            third_person: WordSet::parse(DEFAULT_THIRD_PERSON),
            sentiment: SentimentLexicon::parse(DEFAULT_SENTIMENT).expect("bundled sentiment lexicon"),
        }
    }
}
