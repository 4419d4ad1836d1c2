//! Binary model checkpoints.
//!
//! Layout, all integers little-endian `u64`:
//! magic `CAPSF1`, config JSON (length-prefixed), vocabulary text
//! (length-prefixed), tensor count, then per tensor: name (length-prefixed),
//! rank, dims, and the values as little-endian `f64`.

use std::path::Path;

use crate::config::TrainConfig;
use crate::encoder::{pad_or_truncate, Vocabulary};
use crate::error::{Error, Result};
use crate::fusion::{FeatureVector, Label};
use crate::model::{zero_features, CapsFusionParams, PARAM_NAMES};
use crate::ndtensor::Tensor;
use crate::pipeline::{featurize, NormStats};

pub const MAGIC: &[u8; 6] = b"CAPSF1";
const STATS_NAME: &str = "norm_stats";

/// Everything needed to run a trained model on raw text.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub vocab: Vocabulary,
    pub params: CapsFusionParams,
    pub stats: NormStats,
}

fn put_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_bytes(out: &mut Vec<u8>, b: &[u8]) {
    put_u64(out, b.len() as u64);
    out.extend_from_slice(b);
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        usize::try_from(n)
            .ok()
            .filter(|&n| n <= self.buf.len())
            .ok_or_else(|| Error::Checkpoint(format!("implausible length {n}")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Checkpoint("string is not UTF-8".into()))
    }

    fn tensor(&mut self) -> Result<(String, Tensor)> {
        let name = self.string()?;
        let rank = self.len()?;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(self.len()?);
        }
        let n = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .filter(|&n| n <= self.buf.len() / 8)
            .ok_or_else(|| Error::Checkpoint(format!("{name}: implausible shape {dims:?}")))?;
        let data = self
            .take(n * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let t = Tensor::new(dims, data).map_err(|e| Error::Checkpoint(format!("{name}: {e}")))?;
        Ok((name, t))
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        put_bytes(&mut out, self.config.to_json().as_bytes());
        put_bytes(&mut out, self.vocab.to_text().as_bytes());
        let stats = self.stats.to_tensor();
        let tensors: Vec<(&str, &Tensor)> = PARAM_NAMES
            .iter()
            .copied()
            .zip(self.params.tensors())
            .chain([(STATS_NAME, &stats)])
            .collect();
        put_u64(&mut out, tensors.len() as u64);
        for (name, t) in tensors {
            put_bytes(&mut out, name.as_bytes());
            put_u64(&mut out, t.rank() as u64);
            for &d in t.shape() {
                put_u64(&mut out, d as u64);
            }
            for x in t.data() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(MAGIC.len()).ok() != Some(&MAGIC[..]) {
            return Err(Error::Checkpoint("bad magic; not a CAPSF1 checkpoint".into()));
        }
        let config = TrainConfig::from_json(&r.string()?).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let vocab = Vocabulary::from_text(&r.string()?).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let count = r.len()?;
        if count != PARAM_NAMES.len() + 1 {
            return Err(Error::Checkpoint(format!("expected {} tensors, found {count}", PARAM_NAMES.len() + 1)));
        }
        let mut tensors = Vec::with_capacity(PARAM_NAMES.len());
        for expected in PARAM_NAMES {
            let (name, t) = r.tensor()?;
            if name != expected {
                return Err(Error::Checkpoint(format!("expected tensor {expected}, found {name}")));
            }
            tensors.push(t);
        }
        let (name, st) = r.tensor()?;
        if name != STATS_NAME {
            return Err(Error::Checkpoint(format!("expected tensor {STATS_NAME}, found {name}")));
        }
        if r.pos != buf.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", buf.len() - r.pos)));
        }
        Ok(Checkpoint {
            params: CapsFusionParams::from_tensors(&config, vocab.len(), tensors)?,
            stats: NormStats::from_tensor(&st)?,
            config,
            vocab,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&buf)
    }

    /// Padded token ids for raw text.
    pub fn tokens(&self, text: &str) -> Result<Vec<usize>> {
        pad_or_truncate(&self.vocab.encode(text), self.config.seq_len)
    }

    /// Probability and label for raw text. Without metadata the feature
    /// input is the zero vector.
    pub fn predict(&self, text: &str, features: Option<&FeatureVector>) -> Result<(f64, Label)> {
        let f = match features {
            Some(f) => featurize(f, &self.stats)?,
            None => zero_features(),
        };
        self.params.predict(&self.tokens(text)?, &f)
    }
}
