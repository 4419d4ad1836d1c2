// Train on a synthetic corpus whose label is carried by planted tokens
// and report held-out metrics.

use capsfusion::config::TrainConfig;
use capsfusion::pipeline::{split, synth_corpus, Encoding, Lexicons, SynthSpec};
use capsfusion::trainer::{evaluate, metrics_csv, train_with};

pub fn run_example() -> capsfusion::Result<()> {
    let corpus = synth_corpus(&SynthSpec { records: 400, ..Default::default() }, 7)?;
    let (train_set, test_set) = split(corpus, 0.8, 7, |r| r.label.expect("synthetic records are labelled"))?;

    let cfg = TrainConfig {
        epochs: 4,
        seq_len: 16,
        embed_dim: 16,
        hidden: 12,
        learning_rate: 0.005,
        seed: 7,
        ..Default::default()
    };
    let lex = Lexicons::default().sentiment;
    let enc = Encoding::fit(&train_set, cfg.min_token_count, &lex);
    let train_x = enc.encode(&train_set, cfg.seq_len, &lex)?;
    let test_x = enc.encode(&test_set, cfg.seq_len, &lex)?;

    let out = train_with(&train_x, &cfg, enc.vocab.len(), |e, l| println!("epoch {e}: loss {l:.4}"))?;
    let m = evaluate(&out.params, &test_x)?;
    println!("TP={} FP={} TN={} FN={}", m.tp, m.fp, m.tn, m.fn_);
    print!("{}", metrics_csv(&[("capsfusion", &m)]));
    Ok(())
}

fn main() -> capsfusion::Result<()> {
    run_example()
}
