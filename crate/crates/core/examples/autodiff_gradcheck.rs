// Build a small expression on the tape, read its gradients, and compare
// them with central differences.

use capsfusion::ndtensor::{grad_check, Tape, Tensor};

pub fn run_example() -> capsfusion::Result<()> {
    let mut tape = Tape::new();
    let w = tape.leaf(Tensor::matrix(&[[0.5, -1.0, 0.25], [1.5, 0.3, -0.7]]));
    let x = tape.leaf(Tensor::vector(vec![1.0, 2.0, -1.0]));
    let h = tape.matvec(w, x)?;
    let h = tape.relu(h)?;
    let p = tape.sum(h)?;
    let p = tape.sigmoid(p)?;
    let loss = tape.bce(p, 1.0)?;

    let grads = tape.backward(loss)?;
    println!("loss = {:.6}", tape.value(loss).item());
    println!("dL/dW = {:?}", grads.get(w).map(|g| g.data()));
    println!("dL/dx = {:?}", grads.get(x).map(|g| g.data()));

    let params = [tape.value(w).clone(), tape.value(x).clone()];
    let report = grad_check(
        |t, v| {
            let h = t.matvec(v[0], v[1])?;
            let h = t.relu(h)?;
            let s = t.sum(h)?;
            let p = t.sigmoid(s)?;
            t.bce(p, 1.0)
        },
        &params,
        1e-5,
        1e-6,
    )?;
    println!(
        "grad check over {} entries: max relative error {:.2e} ({})",
        report.entries_checked,
        report.max_relative_error,
        if report.passed() { "ok" } else { "FAILED" }
    );
    assert!(report.passed());
    Ok(())
}

fn main() -> capsfusion::Result<()> {
    run_example()
}
