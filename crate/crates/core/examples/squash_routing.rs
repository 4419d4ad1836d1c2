// Squash a few vectors and route random predictions between capsules.

use capsfusion::capsnet::{route_values, squash};
use capsfusion::ndtensor::{Tape, Tensor};
use rand::{Rng, SeedableRng};

pub fn run_example() -> capsfusion::Result<()> {
    let mut tape = Tape::new();
    let s = tape.leaf(Tensor::matrix(&[[1.0, 0.0], [3.0, 0.0], [0.0, 0.0], [3.0, 4.0]]));
    let v = squash(&mut tape, s)?;
    for (i, row) in tape.value(v).data().chunks(2).enumerate() {
        println!("squash(s{i}) = [{:.4}, {:.4}]", row[0], row[1]);
    }

    // 6 input capsules voting for 3 outputs of width 4
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let data = (0..6 * 3 * 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let pred = Tensor::new(vec![6, 3, 4], data)?;
    for r in 1..=3 {
        let st = route_values(&pred, r)?;
        let norms: Vec<String> = (0..3)
            .map(|j| format!("{:.4}", st.outputs.row(j).iter().map(|x| x * x).sum::<f64>().sqrt()))
            .collect();
        println!("r={r}: output norms {} | coupling of capsule 0 {:?}", norms.join(" "), st.coupling.row(0));
    }
    Ok(())
}

fn main() -> capsfusion::Result<()> {
    run_example()
}
