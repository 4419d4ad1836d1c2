// Dropout and batch-size sweeps over the default grids.

use capsfusion::config::TrainConfig;
use capsfusion::pipeline::{split, synth_corpus, Encoding, Lexicons, SignalMode, SynthSpec};
use capsfusion::trainer::{sweep, sweep_csv, Grid};

pub fn run_example() -> capsfusion::Result<()> {
    let spec = SynthSpec { records: 120, mode: SignalMode::Both, plant_rate: 0.5, ..Default::default() };
    let (tr, te) = split(synth_corpus(&spec, 5)?, 0.8, 5, |r| r.label.expect("labelled"))?;
    let cfg = TrainConfig {
        epochs: 2,
        seq_len: 12,
        embed_dim: 8,
        hidden: 6,
        output_capsules: 2,
        output_capsule_dim: 4,
        feature_hidden: 4,
        learning_rate: 0.01,
        ..Default::default()
    };
    let lex = Lexicons::default().sentiment;
    let enc = Encoding::fit(&tr, 1, &lex);
    let (train_x, test_x) = (enc.encode(&tr, cfg.seq_len, &lex)?, enc.encode(&te, cfg.seq_len, &lex)?);

    for name in ["dropout", "batch"] {
        let grid: Grid = name.parse()?;
        let rows = sweep(&train_x, &test_x, &cfg, &grid, enc.vocab.len())?;
        println!("# {name} grid, {} points", rows.len());
        print!("{}", sweep_csv(&rows));
    }
    Ok(())
}

fn main() -> capsfusion::Result<()> {
    run_example()
}
