use std::str::FromStr;

use super::{evaluate, train, MetricsReport};
use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::fusion::Label;
use crate::pipeline::AnnotatedExample;

pub fn default_dropout_grid() -> Vec<f64> {
    vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
}

pub fn default_batch_grid() -> Vec<usize> {
    vec![2, 4, 6, 8, 16, 32, 64, 128, 512, 1024]
}

/// One hyperparameter axis; everything else comes from the base config.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Dropout(Vec<f64>),
    Batch(Vec<usize>),
}

impl FromStr for Grid {
    type Err = Error;

    /// `dropout` or `batch`, with the default points.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dropout" => Ok(Grid::Dropout(default_dropout_grid())),
            "batch" => Ok(Grid::Batch(default_batch_grid())),
            other => Err(Error::Config(format!("unknown grid {other:?}; expected dropout or batch"))),
        }
    }
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Dropout(v) => v.len(),
            Grid::Batch(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn configs(&self, base: &TrainConfig) -> Vec<TrainConfig> {
        match self {
            Grid::Dropout(v) => v.iter().map(|&dropout| TrainConfig { dropout, ..base.clone() }).collect(),
            Grid::Batch(v) => v
                .iter()
                .map(|&batch_size| TrainConfig { batch_size, ..base.clone() })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub dropout: f64,
    pub batch_size: usize,
    /// `None` when training or evaluation failed at this point.
    pub metrics: Option<MetricsReport>,
}

/// Trains and evaluates once per grid point on a shared split. Failed
/// points are kept as rows without metrics.
pub fn sweep(
    train_set: &[AnnotatedExample],
    test_set: &[AnnotatedExample],
    base: &TrainConfig,
    grid: &Grid,
    vocab_size: usize,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    Ok(grid
        .configs(base)
        .into_iter()
        .map(|cfg| {
            let metrics = train(train_set, &cfg, vocab_size)
                .and_then(|out| evaluate(&out.params, test_set))
                .ok();
            SweepRow {
                dropout: cfg.dropout,
                batch_size: cfg.batch_size,
                metrics,
            }
        })
        .collect())
}

pub const SWEEP_HEADER: &str = "dropout,batch_size,accuracy,precision,recall,f1";

/// Precision, recall and F1 are those of the positive class.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let (acc, c) = match &r.metrics {
            Some(m) => (m.accuracy, m.class(Label::Positive)),
            None => (f64::NAN, super::ClassScores { precision: f64::NAN, recall: f64::NAN, f1: f64::NAN }),
        };
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.dropout, r.batch_size, acc, c.precision, c.recall, c.f1
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids() {
        assert_eq!(default_dropout_grid().len(), 8);
        assert_eq!(default_batch_grid().len(), 10);
        assert_eq!("dropout".parse::<Grid>().unwrap().len(), 8);
        assert_eq!("batch".parse::<Grid>().unwrap().len(), 10);
        assert!(matches!("lr".parse::<Grid>(), Err(Error::Config(_))));
    }

    #[test]
    fn failed_point_gives_nan_row() {
        let row = SweepRow { dropout: 0.5, batch_size: 4, metrics: None };
        assert_eq!(sweep_csv(&[row]), format!("{SWEEP_HEADER}\n0.5,4,NaN,NaN,NaN,NaN\n"));
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(sweep(&[], &[], &TrainConfig::default(), &Grid::Batch(vec![]), 4).is_err());
    }

    #[test]
    fn empty_data_fails_every_point_but_returns_rows() {
        let rows = sweep(&[], &[], &TrainConfig::default(), &Grid::Dropout(vec![0.2, 0.3]), 4).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.metrics.is_none()));
    }
}
