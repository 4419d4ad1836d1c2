// Train briefly, save a checkpoint, reload it and classify new text.

use capsfusion::checkpoint::Checkpoint;
use capsfusion::config::TrainConfig;
use capsfusion::fusion::FeatureVector;
use capsfusion::pipeline::{synth_corpus, Encoding, Lexicons, SynthSpec};
use capsfusion::trainer::train;

pub fn run_example() -> capsfusion::Result<()> {
    let corpus = synth_corpus(&SynthSpec { records: 200, ..Default::default() }, 2)?;
    let cfg = TrainConfig {
        epochs: 3,
        seq_len: 16,
        embed_dim: 8,
        hidden: 6,
        learning_rate: 0.01,
        ..Default::default()
    };
    let lex = Lexicons::default().sentiment;
    let enc = Encoding::fit(&corpus, 1, &lex);
    let data = enc.encode(&corpus, cfg.seq_len, &lex)?;
    let out = train(&data, &cfg, enc.vocab.len())?;

    let ckpt = Checkpoint { config: cfg, vocab: enc.vocab, params: out.params, stats: enc.stats };
    let dir = tempfile::tempdir().map_err(|e| capsfusion::Error::InvalidArgument(e.to_string()))?;
    let path = dir.path().join("model.ckpt");
    ckpt.save(&path)?;
    let loaded = Checkpoint::load(&path)?;
    println!("saved {} bytes; reload identical: {}", std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0), loaded == ckpt);

    let meta = FeatureVector { sentiment: -1, polarity: -0.5, subjectivity: 0.8, followers: 40, likes: 2, replies: 5, retweets: 0 };
    for text in ["suicide w4 pos2 w17", "suicide neg0 w4 w9", "suicide w12"] {
        let (p, label) = loaded.predict(text, Some(&meta))?;
        let (p0, label0) = loaded.predict(text, None)?;
        println!("{text:<22} with metadata {p:.3},{label}   without {p0:.3},{label0}");
    }
    Ok(())
}

fn main() -> capsfusion::Result<()> {
    run_example()
}
