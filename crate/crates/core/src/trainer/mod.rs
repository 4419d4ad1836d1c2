//! Optimization loop, evaluation, sweeps and a bag-of-words baseline.

mod adam;
mod baseline;
mod metrics;
mod sweep;

pub use adam::Adam;
pub use baseline::{bow_baseline, BowConfig, BowModel};
pub use metrics::{metrics_csv, write_metrics_csv, ClassScores, MetricsReport, METRICS_HEADER};
pub use sweep::{default_batch_grid, default_dropout_grid, sweep, sweep_csv, Grid, SweepRow, SWEEP_HEADER};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::TrainConfig;
use crate::encoder::PAD;
use crate::error::{Error, Result};
use crate::model::{CapsFusionParams, Dropout};
use crate::ndtensor::{Tape, Tensor};
use crate::pipeline::AnnotatedExample;

const EMBEDDING: usize = 0;
const W_FEAT: usize = 12;

/// Trained parameters and the mean training loss of every epoch.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: CapsFusionParams,
    pub losses: Vec<f64>,
}

impl TrainOutcome {
    pub fn loss_csv(&self) -> String {
        let mut s = String::from("epoch,loss\n");
        for (i, l) in self.losses.iter().enumerate() {
            s.push_str(&format!("{},{l}\n", i + 1));
        }
        s
    }
}

pub fn train(data: &[AnnotatedExample], cfg: &TrainConfig, vocab_size: usize) -> Result<TrainOutcome> {
    train_with(data, cfg, vocab_size, |_, _| {})
}

/// Like [`train`], calling `on_epoch(epoch, mean_loss)` after every epoch.
pub fn train_with(
    data: &[AnnotatedExample],
    cfg: &TrainConfig,
    vocab_size: usize,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    for (i, ex) in data.iter().enumerate() {
        if ex.token_ids.len() != cfg.seq_len {
            return Err(Error::InvalidArgument(format!(
                "example {i} has {} tokens, expected {}",
                ex.token_ids.len(),
                cfg.seq_len
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = CapsFusionParams::init(cfg, vocab_size, &mut rng);
    let mut opt = Adam::new(cfg.learning_rate);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut tape = Tape::new();
            let vars = params.bind(&mut tape);
            let mut dropout = Dropout { rate: cfg.dropout, rng: &mut rng };
            let mut sum = None;
            for &i in batch {
                let ex = &data[i];
                let l = params.loss(&mut tape, &vars, &ex.token_ids, &ex.features, ex.label, Some(&mut dropout))?;
                sum = Some(match sum {
                    None => l,
                    Some(s) => tape.add(s, l)?,
                });
            }
            let sum = sum.expect("chunks are non-empty");
            let loss = tape.scale(sum, 1.0 / batch.len() as f64)?;
            let value = tape.value(loss).item();
            if !value.is_finite() {
                return Err(Error::NonFiniteLoss { epoch: epoch + 1, batch: b + 1 });
            }
            total += value * batch.len() as f64;

            let g = tape.backward(loss)?;
            let mut grads: Vec<Tensor> = vars
                .all()
                .iter()
                .zip(params.tensors())
                .map(|(&v, p)| g.get_or_zeros(v, p))
                .collect();
            let k = params.encoder.embed_dim();
            grads[EMBEDDING].data_mut()[PAD * k..(PAD + 1) * k].fill(0.0);
            if !cfg.use_features {
                grads[W_FEAT].data_mut().fill(0.0);
            }
            opt.step(&mut params.tensors_mut(), &grads)?;
            params.clamp_recurrent(cfg.u_max);
        }
        let mean = total / data.len() as f64;
        on_epoch(epoch + 1, mean);
        losses.push(mean);
    }
    Ok(TrainOutcome { params, losses })
}

/// Evaluation-mode predictions scored against the stored labels.
pub fn evaluate(params: &CapsFusionParams, data: &[AnnotatedExample]) -> Result<MetricsReport> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("evaluation set is empty".into()));
    }
    let pairs = data
        .iter()
        .map(|ex| Ok((params.predict(&ex.token_ids, &ex.features)?.1, ex.label)))
        .collect::<Result<Vec<_>>>()?;
    MetricsReport::from_pairs(pairs)
}
