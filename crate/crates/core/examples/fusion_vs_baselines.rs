// Label carried only by metadata: the fused model against a text-only
// ablation and a bag-of-words logistic regression.

use capsfusion::config::TrainConfig;
use capsfusion::pipeline::{split, synth_corpus, Encoding, Lexicons, SignalMode, SynthSpec, TweetRecord};
use capsfusion::trainer::{bow_baseline, evaluate, metrics_csv, train, BowConfig};

pub fn run_example() -> capsfusion::Result<()> {
    let spec = SynthSpec { records: 500, mode: SignalMode::Features, ..Default::default() };
    let corpus = synth_corpus(&spec, 7)?;
    let (tr, te) = split(corpus, 0.8, 7, |r| r.label.expect("labelled"))?;

    let cfg = TrainConfig {
        epochs: 8,
        seq_len: 16,
        embed_dim: 16,
        hidden: 12,
        learning_rate: 0.005,
        ..Default::default()
    };
    let lex = Lexicons::default().sentiment;
    let enc = Encoding::fit(&tr, 1, &lex);
    let (train_x, test_x) = (enc.encode(&tr, cfg.seq_len, &lex)?, enc.encode(&te, cfg.seq_len, &lex)?);

    let fused = evaluate(&train(&train_x, &cfg, enc.vocab.len())?.params, &test_x)?;
    let text_cfg = TrainConfig { use_features: false, ..cfg };
    let text_only = evaluate(&train(&train_x, &text_cfg, enc.vocab.len())?.params, &test_x)?;
    let pairs = |v: &[TweetRecord]| v.iter().map(|r| (r.text.clone(), r.label.expect("labelled"))).collect::<Vec<_>>();
    let bow = bow_baseline(&pairs(&tr), &pairs(&te), &BowConfig::default())?;

    print!("{}", metrics_csv(&[("capsfusion", &fused), ("text-only", &text_only), ("bag-of-words", &bow)]));
    Ok(())
}

fn main() -> capsfusion::Result<()> {
    run_example()
}
