//! Rule-based positive/negative labelling of keyword-matched posts.

use super::corpus::TweetRecord;
use super::features::lexicon_sentiment;
use super::filter::keyword_match;
use super::lexicon::{KeywordList, Lexicons};
use crate::fusion::Label;
use crate::text;

/// Which rule decided a label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reason {
    NoKeyword,
    /// Every keyword occurrence is preceded by a negation cue.
    Negated,
    /// Every non-negated occurrence has a third-person subject.
    ThirdPerson,
    /// Subjectivity below the threshold.
    NotPersonal,
    /// Personal, first-person, but sentiment is not negative.
    NotNegative,
    FirstPersonDistress,
}

#[derive(Clone, Debug)]
pub struct Annotator {
    pub keywords: KeywordList,
    pub lexicons: Lexicons,
    /// Tokens before a keyword searched for a negation cue.
    pub window: usize,
    pub subjectivity_threshold: f64,
}

impl Default for Annotator {
    fn default() -> Self {
        Annotator::new(KeywordList::default_collection(), Lexicons::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Person {
    First,
    Third,
}

impl Annotator {
    pub fn new(keywords: KeywordList, lexicons: Lexicons) -> Self {
        Annotator {
            keywords,
            lexicons,
            window: 3,
            subjectivity_threshold: 0.3,
        }
    }

    pub fn annotate(&self, record: &TweetRecord) -> Label {
        self.explain(record).0
    }

    pub fn explain(&self, record: &TweetRecord) -> (Label, Reason) {
        let neg = |r| (Label::Negative, r);
        if !keyword_match(&record.text, &self.keywords) {
            return neg(Reason::NoKeyword);
        }
        let occ = self.occurrences(&record.text);
        let live: Vec<Option<Person>> = occ.iter().filter(|o| !o.0).map(|o| o.1).collect();
        if !occ.is_empty() && live.is_empty() {
            return neg(Reason::Negated);
        }
        // an occurrence with no person marker counts as first person
        if !occ.is_empty() && live.iter().all(|p| *p == Some(Person::Third)) {
            return neg(Reason::ThirdPerson);
        }
        let (se, pol, subj) = self.sentiment(record);
        if subj < self.subjectivity_threshold {
            return neg(Reason::NotPersonal);
        }
        if !(se == -1 || pol < 0.0) {
            return neg(Reason::NotNegative);
        }
        (Label::Positive, Reason::FirstPersonDistress)
    }

    fn sentiment(&self, r: &TweetRecord) -> (i8, f64, f64) {
        let lex = lexicon_sentiment(&r.text, &self.lexicons.sentiment);
        (
            r.sentiment.unwrap_or(lex.0),
            r.polarity.unwrap_or(lex.1),
            r.subjectivity.unwrap_or(lex.2),
        )
    }

    fn person(&self, tok: &str) -> Option<Person> {
        if self.lexicons.first_person.contains(tok) {
            Some(Person::First)
        } else if self.lexicons.third_person.contains(tok) {
            Some(Person::Third)
        } else {
            None
        }
    }

    /// `(negated, subject)` for every token-level keyword occurrence.
    fn occurrences(&self, raw: &str) -> Vec<(bool, Option<Person>)> {
        let phrases: Vec<Vec<String>> = self
            .keywords
            .phrases()
            .iter()
            .map(|p| text::tokenize(p))
            .filter(|p| !p.is_empty())
            .collect();
        let mut out = Vec::new();
        for clause in text::clauses(raw) {
            for phrase in &phrases {
                let m = phrase.len();
                if m > clause.len() {
                    continue;
                }
                for i in 0..=clause.len() - m {
                    if !phrase.iter().zip(&clause[i..i + m]).all(|(p, t)| t.contains(p.as_str())) {
                        continue;
                    }
                    let negated = clause[i.saturating_sub(self.window)..i]
                        .iter()
                        .any(|t| self.lexicons.negators.contains(t));
                    let subject = clause[..i]
                        .iter()
                        .rev()
                        .find_map(|t| self.person(t))
                        .or_else(|| clause[i + m..].iter().find_map(|t| self.person(t)));
                    out.push((negated, subject));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(text: &str, sentiment: Option<(i8, f64, f64)>) -> TweetRecord {
        TweetRecord {
            id: "x".into(),
            text: text.into(),
            followers: 0,
            likes: 0,
            replies: 0,
            retweets: 0,
            sentiment: sentiment.map(|s| s.0),
            polarity: sentiment.map(|s| s.1),
            subjectivity: sentiment.map(|s| s.2),
            label: None,
        }
    }

    const DISTRESS: Option<(i8, f64, f64)> = Some((-1, -0.7, 0.9));

    #[test]
    fn denial_is_negative() {
        let a = Annotator::default();
        assert_eq!(a.explain(&rec("I will not commit suicide", DISTRESS)), (Label::Negative, Reason::Negated));
    }

    #[test]
    fn third_person_is_negative() {
        let a = Annotator::default();
        let r = rec("My friend says he thinks about suicide every day", DISTRESS);
        assert_eq!(a.explain(&r), (Label::Negative, Reason::ThirdPerson));
    }

    #[test]
    fn first_person_distress_is_positive() {
        let a = Annotator::default();
        let r = rec("I think about suicide every night", DISTRESS);
        assert_eq!(a.explain(&r), (Label::Positive, Reason::FirstPersonDistress));
        // lexicon fallback reaches the same verdict
        assert_eq!(a.annotate(&rec("I feel hopeless and think about suicide", None)), Label::Positive);
    }

    #[test]
    fn other_rules() {
        let a = Annotator::default();
        assert_eq!(a.explain(&rec("nice day", DISTRESS)).1, Reason::NoKeyword);
        assert_eq!(a.explain(&rec("i read about suicide", Some((0, 0.0, 0.1)))).1, Reason::NotPersonal);
        assert_eq!(a.explain(&rec("i read about suicide", Some((1, 0.5, 0.8)))).1, Reason::NotNegative);
    }

    #[test]
    fn negation_outside_window_does_not_count() {
        let a = Annotator::default();
        let r = rec("not that it matters but i think about suicide", DISTRESS);
        assert_eq!(a.annotate(&r), Label::Positive);
    }

    #[test]
    fn persian_denial() {
        let a = Annotator::default();
        assert_eq!(a.explain(&rec("من هرگز خودکشی نمی‌کنم", DISTRESS)).1, Reason::Negated);
        assert_eq!(a.annotate(&rec("من به خودکشی فکر میکنم", DISTRESS)), Label::Positive);
    }

    #[test]
    fn pure_function() {
        let a = Annotator::default();
        let r = rec("i want to die", None);
        assert_eq!(a.explain(&r), a.explain(&r.clone()));
    }
}
