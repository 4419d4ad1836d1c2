//! Metadata branch and the single-neuron fusion head.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::{indrnn_step, CellVars, IndRnnCell};
use crate::error::{Error, Result};
use crate::ndtensor::{sigmoid, Tape, Tensor, Var, BCE_CLAMP};

/// Sentiment, polarity, subjectivity and four engagement counts.
pub const FEATURE_DIM: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Negative => 0.0,
            Label::Positive => 1.0,
        }
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Negative => "negative",
            Label::Positive => "positive",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw metadata attached to a post, before normalization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub sentiment: i8,
    pub polarity: f64,
    pub subjectivity: f64,
    pub followers: u64,
    pub likes: u64,
    pub replies: u64,
    pub retweets: u64,
}

impl FeatureVector {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.sentiment, -1..=1) {
            return Err(Error::InvalidArgument(format!(
                "sentiment must be -1, 0 or 1, got {}",
                self.sentiment
            )));
        }
        if !(-1.0..=1.0).contains(&self.polarity) {
            return Err(Error::InvalidArgument(format!(
                "polarity {} outside [-1, 1]",
                self.polarity
            )));
        }
        if !(0.0..=1.0).contains(&self.subjectivity) {
            return Err(Error::InvalidArgument(format!(
                "subjectivity {} outside [0, 1]",
                self.subjectivity
            )));
        }
        Ok(())
    }

    pub fn counts(&self) -> [u64; 4] {
        [self.followers, self.likes, self.replies, self.retweets]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionParams {
    /// Applied once to the normalized feature vector from a zero state.
    pub feature_cell: IndRnnCell,
    /// `[1, n_out * d_out]`.
    pub w_text: Tensor,
    /// `[1, H_f]`.
    pub w_feat: Tensor,
    /// `[1]`.
    pub bias: Tensor,
}

#[derive(Clone, Copy, Debug)]
pub struct FusionVars {
    pub feature_cell: CellVars,
    pub w_text: Var,
    pub w_feat: Var,
    pub bias: Var,
}

impl FusionParams {
    pub fn init(text_dim: usize, feature_hidden: usize, rng: &mut impl Rng) -> Self {
        let head = |n: usize, rng: &mut dyn rand::RngCore| {
            let a = (6.0 / (n + 1) as f64).sqrt();
            Tensor::new(vec![1, n], (0..n).map(|_| rng.gen_range(-a..a)).collect()).unwrap()
        };
        let feature_cell = IndRnnCell::init(FEATURE_DIM, feature_hidden, rng);
        FusionParams {
            feature_cell,
            w_text: head(text_dim, rng),
            w_feat: head(feature_hidden, rng),
            bias: Tensor::scalar(0.0),
        }
    }

    pub fn bind(&self, tape: &mut Tape) -> FusionVars {
        FusionVars {
            feature_cell: self.feature_cell.bind(tape),
            w_text: tape.leaf(self.w_text.clone()),
            w_feat: tape.leaf(self.w_feat.clone()),
            bias: tape.leaf(self.bias.clone()),
        }
    }
}

/// One recurrent step from a zero state, which reduces to
/// `relu(W f + b)`.
pub fn encode_features(tape: &mut Tape, features: Var, cell: &CellVars) -> Result<Var> {
    let len = tape.shape(features).iter().product::<usize>();
    if tape.shape(features).len() != 1 || len != FEATURE_DIM {
        return Err(Error::shape("encode_features", tape.shape(features), &[FEATURE_DIM]));
    }
    let hidden = tape.shape(cell.u)[0];
    let h0 = tape.leaf(Tensor::zeros(&[hidden]));
    indrnn_step(tape, features, h0, cell)
}

/// `W_text · text + W_feat · feat + bias`, a `[1]` node.
pub fn fuse_logit(tape: &mut Tape, text_latent: Var, feat_latent: Var, vars: &FusionVars) -> Result<Var> {
    let t = tape.matvec(vars.w_text, text_latent)?;
    let f = tape.matvec(vars.w_feat, feat_latent)?;
    let sum = tape.add(t, f)?;
    tape.add(sum, vars.bias)
}

/// Probability and decision. Ties at 0.5 go to positive.
pub fn classify(logit: f64) -> (f64, Label) {
    let p = sigmoid(logit);
    (p, Label::from_bool(p >= 0.5))
}

pub fn bce_loss(p: f64, label: Label) -> f64 {
    let y = label.as_f64();
    let pc = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
    -(y * pc.ln() + (1.0 - y) * (1.0 - pc).ln())
}
