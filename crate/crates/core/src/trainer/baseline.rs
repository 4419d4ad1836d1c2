use std::collections::HashMap;

use super::MetricsReport;
use crate::error::{Error, Result};
use crate::fusion::{classify, Label};
use crate::ndtensor::sigmoid;
use crate::text;

/// Full-batch gradient descent settings for the logistic regression.
#[derive(Clone, Debug, PartialEq)]
pub struct BowConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for BowConfig {
    fn default() -> Self {
        BowConfig {
            epochs: 300,
            learning_rate: 0.5,
        }
    }
}

/// Term-frequency logistic regression over the training vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct BowModel {
    vocab: HashMap<String, usize>,
    weights: Vec<f64>,
    bias: f64,
}

impl BowModel {
    fn vectorize(&self, raw: &str) -> Vec<(usize, f64)> {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for t in text::tokenize(raw) {
            if let Some(&j) = self.vocab.get(&t) {
                *counts.entry(j).or_default() += 1.0;
            }
        }
        let mut v: Vec<(usize, f64)> = counts.into_iter().collect();
        v.sort_by_key(|e| e.0);
        v
    }

    pub fn fit<S: AsRef<str>>(data: &[(S, Label)], cfg: &BowConfig) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidArgument("baseline training set is empty".into()));
        }
        let mut vocab = HashMap::new();
        for (t, _) in data {
            for tok in text::tokenize(t.as_ref()) {
                let n = vocab.len();
                vocab.entry(tok).or_insert(n);
            }
        }
        if vocab.is_empty() {
            return Err(Error::InvalidArgument("baseline vocabulary is empty".into()));
        }
        let mut m = BowModel {
            weights: vec![0.0; vocab.len()],
            vocab,
            bias: 0.0,
        };
        let xs: Vec<Vec<(usize, f64)>> = data.iter().map(|(t, _)| m.vectorize(t.as_ref())).collect();
        let n = data.len() as f64;
        let mut gw = vec![0.0; m.weights.len()];
        for _ in 0..cfg.epochs {
            gw.fill(0.0);
            let mut gb = 0.0;
            for (x, (_, y)) in xs.iter().zip(data) {
                let err = sigmoid(m.logit_sparse(x)) - y.as_f64();
                for &(j, v) in x {
                    gw[j] += err * v;
                }
                gb += err;
            }
            for (w, g) in m.weights.iter_mut().zip(&gw) {
                *w -= cfg.learning_rate * g / n;
            }
            m.bias -= cfg.learning_rate * gb / n;
        }
        Ok(m)
    }

    fn logit_sparse(&self, x: &[(usize, f64)]) -> f64 {
        self.bias + x.iter().map(|&(j, v)| self.weights[j] * v).sum::<f64>()
    }

    pub fn logit(&self, raw: &str) -> f64 {
        self.logit_sparse(&self.vectorize(raw))
    }

    pub fn predict(&self, raw: &str) -> Label {
        classify(self.logit(raw)).1
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }
}

/// Fits on `train`, scores on `test`.
pub fn bow_baseline<S: AsRef<str>>(train: &[(S, Label)], test: &[(S, Label)], cfg: &BowConfig) -> Result<MetricsReport> {
    let m = BowModel::fit(train, cfg)?;
    MetricsReport::from_pairs(test.iter().map(|(t, y)| (m.predict(t.as_ref()), *y)))
}
