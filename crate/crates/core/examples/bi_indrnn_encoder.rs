// Tokenize a sentence, embed it and run the bidirectional IndRNN encoder.

use capsfusion::encoder::{pad_or_truncate, EncoderParams, Vocabulary};
use capsfusion::ndtensor::Tape;
use rand::SeedableRng;

pub fn run_example() -> capsfusion::Result<()> {
    let texts = ["I keep thinking about it", "thinking about the weekend", "it keeps raining"];
    let vocab = Vocabulary::build(texts, 1);
    println!("vocabulary: {} ids (2 reserved)", vocab.len());

    let ids = pad_or_truncate(&vocab.encode("I keep thinking about rain"), 8)?;
    println!("ids: {ids:?}");

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let params = EncoderParams::init(vocab.len(), 6, 4, &mut rng);
    let mut tape = Tape::new();
    let vars = params.bind(&mut tape);
    let h = params.encode(&mut tape, &vars, &ids)?;
    let states = tape.value(h);
    println!("encoder states: {:?} (forward half | backward half)", states.shape());
    for t in 0..states.shape()[0] {
        let row: Vec<String> = states.row(t).iter().map(|x| format!("{x:.3}")).collect();
        println!("  t={t}: {}", row.join(" "));
    }
    Ok(())
}

fn main() -> capsfusion::Result<()> {
    run_example()
}
