//! The full capsule-fusion network: Bi-IndRNN encoder, capsule layer,
//! metadata branch and sigmoid head.

use rand::Rng;

use crate::capsnet::CapsuleLayerParams;
use crate::config::TrainConfig;
use crate::encoder::{CellVars, EncoderParams, EncoderVars};
use crate::error::{Error, Result};
use crate::fusion::{classify, encode_features, fuse_logit, FusionParams, FusionVars, Label, FEATURE_DIM};
use crate::ndtensor::{Tape, Tensor, Var};

/// Names of every learnable tensor, in the fixed order used by
/// [`CapsFusionParams::tensors`], checkpoints and the optimizer.
pub const PARAM_NAMES: [&str; 14] = [
    "embedding",
    "encoder.forward.w",
    "encoder.forward.u",
    "encoder.forward.b",
    "encoder.backward.w",
    "encoder.backward.u",
    "encoder.backward.b",
    "capsule.w",
    "features.w",
    "features.u",
    "features.b",
    "head.w_text",
    "head.w_feat",
    "head.bias",
];

#[derive(Clone, Debug, PartialEq)]
pub struct CapsFusionParams {
    pub encoder: EncoderParams,
    pub capsule: CapsuleLayerParams,
    pub fusion: FusionParams,
}

#[derive(Clone, Copy, Debug)]
pub struct ModelVars {
    pub encoder: EncoderVars,
    pub capsule_w: Var,
    pub fusion: FusionVars,
}

impl ModelVars {
    /// Inverse of [`ModelVars::all`].
    pub fn from_slice(v: &[Var]) -> Result<Self> {
        let v: &[Var; 14] = v.try_into().map_err(|_| {
            Error::InvalidArgument(format!("expected 14 parameter handles, got {}", v.len()))
        })?;
        Ok(ModelVars {
            encoder: EncoderVars {
                embedding: v[0],
                forward: CellVars { w: v[1], u: v[2], b: v[3] },
                backward: CellVars { w: v[4], u: v[5], b: v[6] },
            },
            capsule_w: v[7],
            fusion: FusionVars {
                feature_cell: CellVars { w: v[8], u: v[9], b: v[10] },
                w_text: v[11],
                w_feat: v[12],
                bias: v[13],
            },
        })
    }

    /// Leaf handles in [`PARAM_NAMES`] order.
    pub fn all(&self) -> [Var; 14] {
        let e = &self.encoder;
        let f = &self.fusion;
        [
            e.embedding,
            e.forward.w,
            e.forward.u,
            e.forward.b,
            e.backward.w,
            e.backward.u,
            e.backward.b,
            self.capsule_w,
            f.feature_cell.w,
            f.feature_cell.u,
            f.feature_cell.b,
            f.w_text,
            f.w_feat,
            f.bias,
        ]
    }
}

/// Inverted dropout: kept units are scaled by `1 / (1 - rate)`.
pub struct Dropout<'a, R: Rng> {
    pub rate: f64,
    pub rng: &'a mut R,
}

impl<R: Rng> Dropout<'_, R> {
    fn apply(&mut self, tape: &mut Tape, x: Var) -> Result<Var> {
        if self.rate <= 0.0 {
            return Ok(x);
        }
        let keep = 1.0 - self.rate;
        let shape = tape.shape(x).to_vec();
        let n: usize = shape.iter().product();
        let mask: Vec<f64> = (0..n)
            .map(|_| if self.rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect();
        let m = tape.leaf(Tensor::new(shape, mask)?);
        tape.hadamard(x, m)
    }
}

impl CapsFusionParams {
    pub fn init(cfg: &TrainConfig, vocab_size: usize, rng: &mut impl Rng) -> Self {
        let encoder = EncoderParams::init(vocab_size, cfg.embed_dim, cfg.hidden, rng);
        let capsule = CapsuleLayerParams::init(
            cfg.input_capsules(),
            cfg.output_capsules,
            cfg.input_capsule_dim(),
            cfg.output_capsule_dim,
            cfg.routing_iters,
            rng,
        );
        let mut fusion = FusionParams::init(
            cfg.output_capsules * cfg.output_capsule_dim,
            cfg.feature_hidden,
            rng,
        );
        if !cfg.use_features {
            fusion.w_feat = Tensor::zeros(fusion.w_feat.shape());
        }
        CapsFusionParams {
            encoder,
            capsule,
            fusion,
        }
    }

    pub fn bind(&self, tape: &mut Tape) -> ModelVars {
        ModelVars {
            encoder: self.encoder.bind(tape),
            capsule_w: self.capsule.bind(tape),
            fusion: self.fusion.bind(tape),
        }
    }

    /// Pre-sigmoid output for one example as a `[1]` node. `tokens` must
    /// already be padded to the configured length.
    pub fn logit<R: Rng>(
        &self,
        tape: &mut Tape,
        vars: &ModelVars,
        tokens: &[usize],
        features: &Tensor,
        mut dropout: Option<&mut Dropout<'_, R>>,
    ) -> Result<Var> {
        let h = self.encoder.encode(tape, &vars.encoder, tokens)?;
        let v = self.capsule.forward(tape, vars.capsule_w, h)?;
        let text_dim = self.capsule.n_out() * self.capsule.d_out();
        let mut text = tape.reshape(v, &[text_dim])?;

        let f = tape.leaf(features.clone());
        let mut feat = encode_features(tape, f, &vars.fusion.feature_cell)?;
        if let Some(d) = dropout.as_deref_mut() {
            text = d.apply(tape, text)?;
            feat = d.apply(tape, feat)?;
        }
        fuse_logit(tape, text, feat, &vars.fusion)
    }

    /// Binary cross-entropy of one example as a scalar node.
    pub fn loss<R: Rng>(
        &self,
        tape: &mut Tape,
        vars: &ModelVars,
        tokens: &[usize],
        features: &Tensor,
        label: Label,
        dropout: Option<&mut Dropout<'_, R>>,
    ) -> Result<Var> {
        let logit = self.logit(tape, vars, tokens, features, dropout)?;
        let p = tape.sigmoid(logit)?;
        tape.bce(p, label.as_f64())
    }

    /// Evaluation-mode forward pass returning the raw logit.
    pub fn logit_value(&self, tokens: &[usize], features: &Tensor) -> Result<f64> {
        let mut tape = Tape::new();
        let vars = self.bind(&mut tape);
        let l = self.logit::<rand_chacha::ChaCha8Rng>(&mut tape, &vars, tokens, features, None)?;
        Ok(tape.value(l).item())
    }

    pub fn predict(&self, tokens: &[usize], features: &Tensor) -> Result<(f64, Label)> {
        Ok(classify(self.logit_value(tokens, features)?))
    }

    pub fn tensors(&self) -> [&Tensor; 14] {
        let e = &self.encoder;
        let f = &self.fusion;
        [
            &e.embedding,
            &e.forward.w,
            &e.forward.u,
            &e.forward.b,
            &e.backward.w,
            &e.backward.u,
            &e.backward.b,
            &self.capsule.w,
            &f.feature_cell.w,
            &f.feature_cell.u,
            &f.feature_cell.b,
            &f.w_text,
            &f.w_feat,
            &f.bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 14] {
        let e = &mut self.encoder;
        let f = &mut self.fusion;
        [
            &mut e.embedding,
            &mut e.forward.w,
            &mut e.forward.u,
            &mut e.forward.b,
            &mut e.backward.w,
            &mut e.backward.u,
            &mut e.backward.b,
            &mut self.capsule.w,
            &mut f.feature_cell.w,
            &mut f.feature_cell.u,
            &mut f.feature_cell.b,
            &mut f.w_text,
            &mut f.w_feat,
            &mut f.bias,
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Rebuilds parameters from tensors in [`PARAM_NAMES`] order,
    /// checking every shape against `cfg` and `vocab_size`.
    pub fn from_tensors(cfg: &TrainConfig, vocab_size: usize, tensors: Vec<Tensor>) -> Result<Self> {
        let mut rng = rand::rngs::mock::StepRng::new(0, 0);
        let mut p = Self::init(cfg, vocab_size, &mut rng);
        if tensors.len() != PARAM_NAMES.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                PARAM_NAMES.len(),
                tensors.len()
            )));
        }
        for ((slot, t), name) in p.tensors_mut().into_iter().zip(tensors).zip(PARAM_NAMES) {
            if slot.shape() != t.shape() {
                return Err(Error::Checkpoint(format!(
                    "{name}: expected shape {:?}, found {:?}",
                    slot.shape(),
                    t.shape()
                )));
            }
            *slot = t;
        }
        p.capsule = CapsuleLayerParams::new(p.capsule.w, cfg.routing_iters)?;
        Ok(p)
    }

    pub fn clamp_recurrent(&mut self, u_max: f64) {
        self.encoder.forward.clamp_recurrent(u_max);
        self.encoder.backward.clamp_recurrent(u_max);
        self.fusion.feature_cell.clamp_recurrent(u_max);
    }
}

/// Zero feature input, used when metadata is unavailable.
pub fn zero_features() -> Tensor {
    Tensor::zeros(&[FEATURE_DIM])
}
