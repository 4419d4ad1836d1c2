//! Token embedding and the bidirectional IndRNN text encoder.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::ndtensor::{Tape, Tensor, Var};
use crate::text;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
const RESERVED: usize = 2;

/// Token to id map. Ids 0 and 1 are reserved for padding and unknown
/// tokens; corpus tokens start at 2.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from raw texts. Tokens seen fewer than
    /// `min_count` times are left out. Order is by descending frequency,
    /// ties broken lexicographically, so the result is deterministic.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, min_count: usize) -> Self {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for t in texts {
            for tok in text::tokenize(t) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        let mut entries: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count.max(1))
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_tokens(entries.into_iter().map(|(t, _)| t))
    }

    fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut v = Vocabulary::default();
        for t in tokens {
            if !v.index.contains_key(&t) {
                v.index.insert(t.clone(), v.tokens.len() + RESERVED);
                v.tokens.push(t);
            }
        }
        v
    }

    /// Size including the two reserved ids.
    pub fn len(&self) -> usize {
        self.tokens.len() + RESERVED
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        id.checked_sub(RESERVED)
            .and_then(|i| self.tokens.get(i))
            .map(String::as_str)
    }

    /// Tokenizes and maps to ids; out-of-vocabulary tokens become `UNK`.
    pub fn encode(&self, raw: &str) -> Vec<usize> {
        text::tokenize(raw).iter().map(|t| self.id(t)).collect()
    }

    /// One token per line; line `i` (0-based) holds id `i + 2`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.tokens {
            s.push_str(t);
            s.push('\n');
        }
        s
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for (i, line) in s.lines().enumerate() {
            if line.is_empty() || line.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!(
                    "vocabulary line {} is not a single token",
                    i + 1
                )));
            }
            tokens.push(line.to_string());
        }
        let v = Self::from_tokens(tokens.iter().cloned());
        if v.tokens.len() != tokens.len() {
            return Err(Error::InvalidArgument("vocabulary has duplicate tokens".into()));
        }
        Ok(v)
    }
}

/// Right-pads with `PAD` or keeps the first `n` ids.
pub fn pad_or_truncate(tokens: &[usize], n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sequence length must be at least 1".into()));
    }
    let mut out: Vec<usize> = tokens.iter().take(n).copied().collect();
    out.resize(n, PAD);
    Ok(out)
}

/// One direction of an IndRNN layer: `h_t = relu(W x_t + u ⊙ h_{t-1} + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndRnnCell {
    pub w: Tensor,
    pub u: Tensor,
    pub b: Tensor,
}

impl IndRnnCell {
    pub fn new(w: Tensor, u: Tensor, b: Tensor) -> Result<Self> {
        let h = u.len();
        if w.rank() != 2 || w.shape()[0] != h || u.rank() != 1 || b.shape() != u.shape() {
            return Err(Error::shape("indrnn cell", w.shape(), u.shape()));
        }
        Ok(IndRnnCell { w, u, b })
    }

    pub fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let a = (6.0 / (input + hidden) as f64).sqrt();
        let w = (0..hidden * input).map(|_| rng.gen_range(-a..a)).collect();
        let u = (0..hidden).map(|_| rng.gen_range(0.0..1.0)).collect();
        IndRnnCell {
            w: Tensor::new(vec![hidden, input], w).unwrap(),
            u: Tensor::vector(u),
            b: Tensor::zeros(&[hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.len()
    }

    pub fn input(&self) -> usize {
        self.w.shape()[1]
    }

    pub fn bind(&self, tape: &mut Tape) -> CellVars {
        CellVars {
            w: tape.leaf(self.w.clone()),
            u: tape.leaf(self.u.clone()),
            b: tape.leaf(self.b.clone()),
        }
    }

    pub fn clamp_recurrent(&mut self, u_max: f64) {
        for x in self.u.data_mut() {
            *x = x.clamp(-u_max, u_max);
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CellVars {
    pub w: Var,
    pub u: Var,
    pub b: Var,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    /// `[V, k]`; row 0 (PAD) stays zero.
    pub embedding: Tensor,
    pub forward: IndRnnCell,
    pub backward: IndRnnCell,
}

#[derive(Clone, Copy, Debug)]
pub struct EncoderVars {
    pub embedding: Var,
    pub forward: CellVars,
    pub backward: CellVars,
}

impl EncoderParams {
    /// Embeddings uniform in (-0.05, 0.05) with a zero PAD row.
    pub fn init(vocab: usize, embed_dim: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut emb: Vec<f64> = (0..vocab * embed_dim)
            .map(|_| rng.gen_range(-0.05..0.05))
            .collect();
        emb[..embed_dim].iter_mut().for_each(|x| *x = 0.0);
        EncoderParams {
            embedding: Tensor::new(vec![vocab, embed_dim], emb).unwrap(),
            forward: IndRnnCell::init(embed_dim, hidden, rng),
            backward: IndRnnCell::init(embed_dim, hidden, rng),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.shape()[0]
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.shape()[1]
    }

    pub fn hidden(&self) -> usize {
        self.forward.hidden()
    }

    pub fn bind(&self, tape: &mut Tape) -> EncoderVars {
        EncoderVars {
            embedding: tape.leaf(self.embedding.clone()),
            forward: self.forward.bind(tape),
            backward: self.backward.bind(tape),
        }
    }

    /// Embedding lookup followed by the bidirectional layer: `[n, 2H]`.
    pub fn encode(&self, tape: &mut Tape, vars: &EncoderVars, tokens: &[usize]) -> Result<Var> {
        let x = embed(tape, vars.embedding, tokens)?;
        bi_indrnn(tape, x, vars)
    }
}

/// `[n, k]` matrix whose row `t` is the embedding of `tokens[t]`.
pub fn embed(tape: &mut Tape, embedding: Var, tokens: &[usize]) -> Result<Var> {
    tape.gather_rows(embedding, tokens)
}

pub fn indrnn_step(tape: &mut Tape, x_t: Var, h_prev: Var, cell: &CellVars) -> Result<Var> {
    let wx = tape.matvec(cell.w, x_t)?;
    let rec = tape.hadamard(cell.u, h_prev)?;
    let pre = tape.add(wx, rec)?;
    let pre = tape.add(pre, cell.b)?;
    tape.relu(pre)
}

/// Runs both directions from zero initial states over `x: [n, k]`.
///
/// Row `t` of the `[n, 2H]` result is the forward state after `x_0..=x_t`
/// followed by the backward state after `x_{n-1}..=x_t`.
pub fn bi_indrnn(tape: &mut Tape, x: Var, vars: &EncoderVars) -> Result<Var> {
    let shape = tape.shape(x).to_vec();
    if shape.len() != 2 {
        return Err(Error::shape("bi_indrnn", &shape, tape.shape(vars.forward.w)));
    }
    let n = shape[0];
    let hidden = tape.shape(vars.forward.u)[0];
    if tape.shape(vars.backward.u)[0] != hidden {
        return Err(Error::shape(
            "bi_indrnn",
            tape.shape(vars.forward.u),
            tape.shape(vars.backward.u),
        ));
    }
    let rows: Vec<Var> = (0..n).map(|t| tape.row(x, t)).collect::<Result<_>>()?;

    let run = |tape: &mut Tape, cell: &CellVars, order: &mut dyn Iterator<Item = usize>| -> Result<Vec<(usize, Var)>> {
        let mut h = tape.leaf(Tensor::zeros(&[hidden]));
        let mut states = Vec::with_capacity(n);
        for t in order {
            h = indrnn_step(tape, rows[t], h, cell)?;
            states.push((t, h));
        }
        Ok(states)
    };
    let fwd = run(tape, &vars.forward, &mut (0..n))?;
    let mut bwd = run(tape, &vars.backward, &mut (0..n).rev())?;
    bwd.reverse();

    let mut parts = Vec::with_capacity(2 * n);
    for ((_, f), (_, b)) in fwd.into_iter().zip(bwd) {
        parts.push(f);
        parts.push(b);
    }
    let flat = tape.concat(&parts)?;
    tape.reshape(flat, &[n, 2 * hidden])
}
