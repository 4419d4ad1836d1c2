//! Capsule layer over encoder states: prediction vectors, routing by
//! agreement and the squash nonlinearity.
//!
//! Routing runs inside the tape, so gradients flow through every
//! iteration. Coupling logits start at zero and are updated `r - 1` times;
//! there is no update after the final output is computed.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ndtensor::{Tape, Tensor, Var};

#[derive(Clone, Debug, PartialEq)]
pub struct CapsuleLayerParams {
    /// `[n_in, n_out, d_out, d_in]` transformation matrices.
    pub w: Tensor,
    pub iterations: usize,
}

/// Final routing quantities for one input.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutingState {
    /// `[n_in, n_out]` logits that produced `coupling`.
    pub logits: Tensor,
    /// `[n_in, n_out]`, each row a probability vector.
    pub coupling: Tensor,
    /// `[n_out, d_out]`, each row with norm in `[0, 1)`.
    pub outputs: Tensor,
}

#[derive(Clone, Copy, Debug)]
pub struct RoutingVars {
    pub logits: Var,
    pub coupling: Var,
    pub outputs: Var,
}

impl CapsuleLayerParams {
    pub fn new(w: Tensor, iterations: usize) -> Result<Self> {
        if w.rank() != 4 {
            return Err(Error::InvalidArgument(format!(
                "capsule transforms need shape [n_in, n_out, d_out, d_in], got {:?}",
                w.shape()
            )));
        }
        if iterations < 1 {
            return Err(Error::InvalidArgument("routing needs at least one iteration".into()));
        }
        if !w.is_finite() {
            return Err(Error::InvalidArgument("capsule transforms must be finite".into()));
        }
        Ok(CapsuleLayerParams { w, iterations })
    }

    pub fn init(
        n_in: usize,
        n_out: usize,
        d_in: usize,
        d_out: usize,
        iterations: usize,
        rng: &mut impl Rng,
    ) -> Self {
        // Xavier range shrunk by sqrt(n_in) because every output sums n_in votes.
        let a = (6.0 / ((d_in + d_out) * n_in) as f64).sqrt();
        let data = (0..n_in * n_out * d_out * d_in)
            .map(|_| rng.gen_range(-a..a))
            .collect();
        CapsuleLayerParams {
            w: Tensor::new(vec![n_in, n_out, d_out, d_in], data).unwrap(),
            iterations,
        }
    }

    pub fn n_in(&self) -> usize {
        self.w.shape()[0]
    }

    pub fn n_out(&self) -> usize {
        self.w.shape()[1]
    }

    pub fn d_out(&self) -> usize {
        self.w.shape()[2]
    }

    pub fn d_in(&self) -> usize {
        self.w.shape()[3]
    }

    pub fn bind(&self, tape: &mut Tape) -> Var {
        tape.leaf(self.w.clone())
    }

    /// Reshapes `h` into `n_in` capsules of width `d_in`, predicts, routes
    /// and returns the `[n_out, d_out]` output capsules.
    pub fn forward(&self, tape: &mut Tape, w: Var, h: Var) -> Result<Var> {
        Ok(capsule_layer_forward(tape, h, w, self.iterations)?.outputs)
    }
}

/// Squash over the last axis of `s`.
pub fn squash(tape: &mut Tape, s: Var) -> Result<Var> {
    tape.squash_rows(s)
}

/// `pred[i][j] = w[i][j] · u[i]`.
pub fn predict_vectors(tape: &mut Tape, u: Var, w: Var) -> Result<Var> {
    tape.capsule_predict(w, u)
}

/// Dynamic routing by agreement over predictions `[n_in, n_out, d_out]`.
pub fn route(tape: &mut Tape, pred: Var, iterations: usize) -> Result<RoutingVars> {
    if iterations < 1 {
        return Err(Error::InvalidArgument("routing needs at least one iteration".into()));
    }
    let shape = tape.shape(pred).to_vec();
    if shape.len() != 3 {
        return Err(Error::shape("route", &shape, &[0, 0, 0]));
    }
    let mut logits = tape.leaf(Tensor::zeros(&shape[..2]));
    let mut coupling = tape.softmax_rows(logits)?;
    let mut outputs = squash_sum(tape, coupling, pred)?;
    for _ in 1..iterations {
        let agree = tape.agreement(pred, outputs)?;
        logits = tape.add(logits, agree)?;
        coupling = tape.softmax_rows(logits)?;
        outputs = squash_sum(tape, coupling, pred)?;
    }
    Ok(RoutingVars {
        logits,
        coupling,
        outputs,
    })
}

fn squash_sum(tape: &mut Tape, coupling: Var, pred: Var) -> Result<Var> {
    let s = tape.route_sum(coupling, pred)?;
    tape.squash_rows(s)
}

/// Routing on plain values, outside any training tape.
pub fn route_values(pred: &Tensor, iterations: usize) -> Result<RoutingState> {
    let mut tape = Tape::new();
    let p = tape.leaf(pred.clone());
    let r = route(&mut tape, p, iterations)?;
    Ok(RoutingState {
        logits: tape.value(r.logits).clone(),
        coupling: tape.value(r.coupling).clone(),
        outputs: tape.value(r.outputs).clone(),
    })
}

/// Encoder states `[n, 2H]` to output capsules.
pub fn capsule_layer_forward(tape: &mut Tape, h: Var, w: Var, iterations: usize) -> Result<RoutingVars> {
    let ws = tape.shape(w).to_vec();
    let hs = tape.shape(h).to_vec();
    if ws.len() != 4 {
        return Err(Error::shape("capsule_layer_forward", &hs, &ws));
    }
    let (n_in, d_in) = (ws[0], ws[3]);
    let total: usize = hs.iter().product();
    if total != n_in * d_in {
        return Err(Error::InvalidArgument(format!(
            "encoder output {hs:?} ({total} values) cannot form {n_in} capsules of width {d_in}"
        )));
    }
    let u = tape.reshape(h, &[n_in, d_in])?;
    let pred = predict_vectors(tape, u, w)?;
    route(tape, pred, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred_tensor(n_in: usize, n_out: usize, d: usize, data: Vec<f64>) -> Tensor {
        Tensor::new(vec![n_in, n_out, d], data).unwrap()
    }

    #[test]
    fn squash_examples() {
        let mut t = Tape::new();
        let s = t.leaf(Tensor::vector(vec![3.0, 0.0]));
        let v = squash(&mut t, s).unwrap();
        assert!((t.value(v).data()[0] - 0.9).abs() < 1e-12);
        let z = t.leaf(Tensor::zeros(&[4]));
        let vz = squash(&mut t, z).unwrap();
        assert_eq!(t.value(vz).data(), &[0.0; 4]);
    }

    #[test]
    fn predict_vectors_cases() {
        let mut t = Tape::new();
        let w = t.leaf(Tensor::new(vec![1, 1, 2, 2], vec![2.0, 0.0, 0.0, 3.0]).unwrap());
        let u = t.leaf(Tensor::matrix(&[[1.0, 1.0]]));
        let p = predict_vectors(&mut t, u, w).unwrap();
        assert_eq!(t.value(p).data(), &[2.0, 3.0]);

        // identity transforms copy the input capsule to every output slot
        let mut eye = Vec::new();
        for _ in 0..2 * 3 {
            eye.extend_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        }
        let w = t.leaf(Tensor::new(vec![2, 3, 2, 2], eye).unwrap());
        let u = t.leaf(Tensor::matrix(&[[1.5, -2.0], [0.25, 4.0]]));
        let p = predict_vectors(&mut t, u, w).unwrap();
        let d = t.value(p).data();
        for j in 0..3 {
            assert_eq!(&d[j * 2..j * 2 + 2], &[1.5, -2.0]);
            assert_eq!(&d[6 + j * 2..6 + j * 2 + 2], &[0.25, 4.0]);
        }

        let zero = t.leaf(Tensor::zeros(&[2, 3, 2, 2]));
        let p = predict_vectors(&mut t, u, zero).unwrap();
        assert!(t.value(p).data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_output_capsule_always_couples_fully() {
        let st = route_values(&pred_tensor(1, 1, 2, vec![3.0, 0.0]), 3).unwrap();
        assert_eq!(st.coupling.data(), &[1.0]);
        assert!((st.outputs.data()[0] - 0.9).abs() < 1e-12);
        assert_eq!(st.outputs.data()[1], 0.0);
    }

    #[test]
    fn identical_predictions_keep_uniform_coupling() {
        for r in 1..=4 {
            let st = route_values(&pred_tensor(1, 2, 2, vec![0.3, -0.7, 0.3, -0.7]), r).unwrap();
            assert_eq!(st.coupling.data(), &[0.5, 0.5]);
        }
    }

    #[test]
    fn route_rejects_zero_iterations() {
        assert!(route_values(&pred_tensor(1, 1, 1, vec![1.0]), 0).is_err());
        assert!(CapsuleLayerParams::new(Tensor::zeros(&[1, 1, 1, 1]), 0).is_err());
    }

    #[test]
    fn layer_forward_zero_input_gives_zero_output() {
        let mut t = Tape::new();
        let h = t.leaf(Tensor::zeros(&[3, 4]));
        let w = t.leaf(Tensor::filled(&[3, 2, 5, 4], 0.7));
        let r = capsule_layer_forward(&mut t, h, w, 3).unwrap();
        assert_eq!(t.shape(r.outputs), &[2, 5]);
        assert!(t.value(r.outputs).data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn layer_forward_rejects_bad_geometry() {
        let mut t = Tape::new();
        let h = t.leaf(Tensor::zeros(&[3, 4]));
        let w = t.leaf(Tensor::zeros(&[5, 2, 2, 4]));
        assert!(capsule_layer_forward(&mut t, h, w, 1).is_err());
    }

    #[test]
    fn layer_forward_allows_regrouped_capsules() {
        // [3, 4] regrouped as 2 capsules of width 6
        let mut t = Tape::new();
        let h = t.leaf(Tensor::new(vec![3, 4], (0..12).map(|x| x as f64 * 0.1).collect()).unwrap());
        let w = t.leaf(Tensor::filled(&[2, 2, 3, 6], 0.05));
        let r = capsule_layer_forward(&mut t, h, w, 2).unwrap();
        assert_eq!(t.shape(r.outputs), &[2, 3]);
    }
}
