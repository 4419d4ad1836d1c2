//! Statistical and property checks across the pipeline, model and trainer.

use std::collections::BTreeMap;

use capsfusion::config::TrainConfig;
use capsfusion::fusion::{classify, bce_loss, FeatureVector, Label, FEATURE_DIM};
use capsfusion::model::{CapsFusionParams, Dropout};
use capsfusion::ndtensor::{Tape, Tensor};
use capsfusion::pipeline::{
    featurize, split, stop_filter, synth_corpus, Annotator, Encoding, KeywordKind, KeywordList, Lexicons,
    NormStats, SignalMode, SynthSpec, TweetRecord,
};
use capsfusion::trainer::{bow_baseline, train, BowConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn record(id: usize, text: String) -> TweetRecord {
    TweetRecord {
        id: id.to_string(),
        text,
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

fn small_cfg() -> TrainConfig {
    TrainConfig {
        seq_len: 10,
        embed_dim: 8,
        hidden: 6,
        output_capsules: 2,
        output_capsule_dim: 4,
        feature_hidden: 4,
        learning_rate: 0.01,
        ..Default::default()
    }
}

#[test]
fn feature_mode_text_marginals_are_class_independent() {
    let spec = SynthSpec { records: 1000, mode: SignalMode::Features, ..Default::default() };
    let corpus = synth_corpus(&spec, 7).unwrap();
    let mut table: BTreeMap<String, [f64; 2]> = BTreeMap::new();
    for r in &corpus {
        let c = r.label.unwrap() as usize;
        for w in r.text.split(' ') {
            table.entry(w.to_string()).or_default()[c] += 1.0;
        }
    }
    let totals = table.values().fold([0.0; 2], |a, r| [a[0] + r[0], a[1] + r[1]]);
    let n = totals[0] + totals[1];
    let mut chi2 = 0.0;
    for row in table.values() {
        let rt = row[0] + row[1];
        for c in 0..2 {
            let e = rt * totals[c] / n;
            chi2 += (row[c] - e).powi(2) / e;
        }
    }
    let df = (table.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(df).unwrap().cdf(chi2);
    assert!(p > 0.05, "chi2 {chi2} on {df} dof, p = {p}");
}

#[test]
fn fully_planted_text_mode_is_solved_by_a_keyword_rule() {
    let corpus = synth_corpus(&SynthSpec { records: 1000, ..Default::default() }, 7).unwrap();
    let correct = corpus
        .iter()
        .filter(|r| Label::from_bool(r.text.split(' ').any(|w| w.starts_with("pos"))) == r.label.unwrap())
        .count();
    assert_eq!(correct, 1000);
}

#[test]
fn bag_of_words_is_at_chance_on_feature_signal() {
    let spec = SynthSpec { records: 500, mode: SignalMode::Features, ..Default::default() };
    let (tr, te) = split(synth_corpus(&spec, 11).unwrap(), 0.8, 11, |r| r.label.unwrap()).unwrap();
    let pairs = |v: &[TweetRecord]| v.iter().map(|r| (r.text.clone(), r.label.unwrap())).collect::<Vec<_>>();
    let m = bow_baseline(&pairs(&tr), &pairs(&te), &BowConfig::default()).unwrap();
    assert!((m.accuracy - 0.5).abs() <= 0.08, "{}", m.accuracy);
    let again = bow_baseline(&pairs(&tr), &pairs(&te), &BowConfig::default()).unwrap();
    assert_eq!(m, again);
}

#[test]
fn loss_decreases_over_first_five_epochs_on_text_signal() {
    let cfg = TrainConfig { epochs: 5, dropout: 0.0, ..small_cfg() };
    let corpus = synth_corpus(&SynthSpec { records: 200, ..Default::default() }, 3).unwrap();
    let lex = Lexicons::default().sentiment;
    let enc = Encoding::fit(&corpus, 1, &lex);
    let data = enc.encode(&corpus, cfg.seq_len, &lex).unwrap();
    let out = train(&data, &cfg, enc.vocab.len()).unwrap();
    assert!(out.losses.windows(2).all(|w| w[1] < w[0]), "{:?}", out.losses);
}

fn random_model(seed: u64) -> (CapsFusionParams, TrainConfig) {
    let cfg = small_cfg();
    let p = CapsFusionParams::init(&cfg, 30, &mut ChaCha8Rng::seed_from_u64(seed));
    (p, cfg)
}

fn random_input(rng: &mut impl Rng, cfg: &TrainConfig) -> (Vec<usize>, Tensor) {
    let tokens = (0..cfg.seq_len).map(|_| rng.gen_range(0..30)).collect();
    let f = Tensor::vector((0..FEATURE_DIM).map(|_| rng.gen_range(-2.0..2.0)).collect());
    (tokens, f)
}

#[test]
fn zero_dropout_training_forward_equals_evaluation() {
    let (p, cfg) = random_model(1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let (tokens, f) = random_input(&mut rng, &cfg);
        let mut tape = Tape::new();
        let vars = p.bind(&mut tape);
        let mut mask_rng = ChaCha8Rng::seed_from_u64(0);
        let mut d = Dropout { rate: 0.0, rng: &mut mask_rng };
        let l = p.logit(&mut tape, &vars, &tokens, &f, Some(&mut d)).unwrap();
        let train_mode = tape.value(l).item();
        assert_eq!(train_mode.to_bits(), p.logit_value(&tokens, &f).unwrap().to_bits());
    }
}

#[test]
fn zero_feature_weights_isolate_the_text_branch() {
    let (mut p, cfg) = random_model(4);
    p.fusion.w_feat = Tensor::zeros(p.fusion.w_feat.shape());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (tokens, f) = random_input(&mut rng, &cfg);
        let (_, g) = random_input(&mut rng, &cfg);
        assert_eq!(p.logit_value(&tokens, &f).unwrap(), p.logit_value(&tokens, &g).unwrap());
    }
}

proptest! {
    #[test]
    fn stop_filter_partitions_in_order(texts in prop::collection::vec("[a-c ]{0,6}(https://)?[a-c]{1,3}", 0..30)) {
        let stop = KeywordList::new(["ab", "https://"], KeywordKind::Stop).unwrap();
        let recs: Vec<TweetRecord> = texts.into_iter().enumerate().map(|(i, t)| record(i, t)).collect();
        let (kept, removed) = stop_filter(recs.clone(), &stop);
        prop_assert_eq!(kept.len() + removed.len(), recs.len());
        let ids = |v: &[TweetRecord]| v.iter().map(|r| r.id.parse::<usize>().unwrap()).collect::<Vec<_>>();
        let (k, r) = (ids(&kept), ids(&removed));
        prop_assert!(k.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(r.windows(2).all(|w| w[0] < w[1]));
        for rec in &removed {
            prop_assert!(rec.text.contains("ab") || rec.text.contains("https://"));
        }
    }

    #[test]
    fn featurize_respects_ranges(
        se in -1i8..=1, pol in -1.0f64..=1.0, subj in 0.0f64..=1.0,
        counts in prop::array::uniform4(0u64..u64::MAX / 2),
    ) {
        let f = FeatureVector {
            sentiment: se, polarity: pol, subjectivity: subj,
            followers: counts[0], likes: counts[1], replies: counts[2], retweets: counts[3],
        };
        let stats = NormStats::fit(&[f, FeatureVector::default()]);
        let t = featurize(&f, &stats).unwrap();
        let v = t.data();
        prop_assert!([-1.0, 0.0, 1.0].contains(&v[0]));
        prop_assert!((-1.0..=1.0).contains(&v[1]));
        prop_assert!((0.0..=1.0).contains(&v[2]));
        prop_assert!(v[3..].iter().all(|x| x.is_finite()));
    }

    #[test]
    fn split_is_stratified_and_deterministic(pos in 2usize..40, neg in 2usize..40, ratio in 0.1f64..0.9, seed in any::<u64>()) {
        let items: Vec<(usize, Label)> = (0..pos + neg).map(|i| (i, Label::from_bool(i < pos))).collect();
        let (tr, te) = split(items.clone(), ratio, seed, |x| x.1).unwrap();
        prop_assert_eq!((tr.clone(), te.clone()), split(items, ratio, seed, |x| x.1).unwrap());
        for (label, n) in [(Label::Positive, pos), (Label::Negative, neg)] {
            let k = tr.iter().filter(|x| x.1 == label).count();
            let ideal = ratio * n as f64;
            prop_assert!((k as f64 - ideal).abs() <= 1.0, "{} of {} for ratio {}", k, n, ratio);
            prop_assert_eq!(k + te.iter().filter(|x| x.1 == label).count(), n);
        }
    }

    #[test]
    fn annotate_is_pure(words in prop::collection::vec(prop::sample::select(vec![
        "i", "he", "not", "never", "suicide", "die", "want", "to", "hopeless", "my", "friend", "happy",
    ]), 1..12)) {
        let a = Annotator::default();
        let r = record(0, words.join(" "));
        prop_assert_eq!(a.explain(&r), a.explain(&r.clone()));
    }

    #[test]
    fn classify_flips_with_logit_sign(z in 1e-6f64..30.0) {
        prop_assert_eq!(classify(z).1, Label::Positive);
        prop_assert_eq!(classify(-z).1, Label::Negative);
    }

    #[test]
    fn bce_is_minimized_at_the_label(p in 0.01f64..0.99) {
        prop_assert!(bce_loss(p, Label::Positive) > bce_loss(0.999, Label::Positive));
        prop_assert!(bce_loss(p, Label::Negative) > bce_loss(0.001, Label::Negative));
    }
}
