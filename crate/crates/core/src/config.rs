use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training and model configuration. Read from JSON; unknown keys are an
/// error so that typos do not silently fall back to defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub seed: u64,
    /// Tokens per example after padding or truncation.
    pub seq_len: usize,
    pub embed_dim: usize,
    /// Hidden units per IndRNN direction.
    pub hidden: usize,
    /// Input capsule count; defaults to `seq_len`.
    pub input_capsules: Option<usize>,
    /// Input capsule width; defaults to `2 * hidden`.
    pub input_capsule_dim: Option<usize>,
    pub output_capsules: usize,
    pub output_capsule_dim: usize,
    pub feature_hidden: usize,
    pub routing_iters: usize,
    /// Bound applied to recurrent weights after every update.
    pub u_max: f64,
    /// When false the metadata branch is disconnected (text-only ablation).
    pub use_features: bool,
    pub min_token_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            batch_size: 16,
            dropout: 0.4,
            learning_rate: 1e-3,
            seed: 42,
            seq_len: 64,
            embed_dim: 64,
            hidden: 64,
            input_capsules: None,
            input_capsule_dim: None,
            output_capsules: 4,
            output_capsule_dim: 8,
            feature_hidden: 16,
            routing_iters: 3,
            u_max: 2.0,
            use_features: true,
            min_token_count: 1,
        }
    }
}

impl TrainConfig {
    pub fn input_capsules(&self) -> usize {
        self.input_capsules.unwrap_or(self.seq_len)
    }

    pub fn input_capsule_dim(&self) -> usize {
        self.input_capsule_dim.unwrap_or(2 * self.hidden)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.batch_size < 1 {
            return fail("batch_size must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return fail(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if self.routing_iters < 1 {
            return fail("routing_iters must be at least 1".into());
        }
        if !(self.u_max > 0.0) {
            return fail("u_max must be positive".into());
        }
        for (name, v) in [
            ("seq_len", self.seq_len),
            ("embed_dim", self.embed_dim),
            ("hidden", self.hidden),
            ("output_capsules", self.output_capsules),
            ("output_capsule_dim", self.output_capsule_dim),
            ("feature_hidden", self.feature_hidden),
            ("input_capsules", self.input_capsules()),
            ("input_capsule_dim", self.input_capsule_dim()),
        ] {
            if v == 0 {
                return fail(format!("{name} must be positive"));
            }
        }
        let states = self.seq_len * 2 * self.hidden;
        let caps = self.input_capsules() * self.input_capsule_dim();
        if states != caps {
            return fail(format!(
                "{} input capsules of width {} need {caps} values but the encoder yields {states}",
                self.input_capsules(),
                self.input_capsule_dim()
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: TrainConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        TrainConfig::default().validate().unwrap();
        assert_eq!(TrainConfig::default().input_capsules(), 64);
        assert_eq!(TrainConfig::default().input_capsule_dim(), 128);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c = TrainConfig::from_json(r#"{"epochs": 3, "dropout": 0.0}"#).unwrap();
        assert_eq!(c.epochs, 3);
        assert_eq!(c.dropout, 0.0);
        assert_eq!(c.batch_size, 16);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = TrainConfig::from_json(r#"{"epoch": 3}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn invariant_violations_rejected() {
        for bad in [
            r#"{"batch_size": 0}"#,
            r#"{"dropout": 1.0}"#,
            r#"{"dropout": -0.1}"#,
            r#"{"learning_rate": 0}"#,
            r#"{"routing_iters": 0}"#,
            r#"{"input_capsules": 7}"#,
        ] {
            assert!(TrainConfig::from_json(bad).is_err(), "{bad}");
        }
        // regrouping that preserves the value count is allowed
        TrainConfig::from_json(r#"{"seq_len": 8, "hidden": 4, "input_capsules": 16, "input_capsule_dim": 4}"#)
            .unwrap();
    }

    #[test]
    fn json_round_trip() {
        let c = TrainConfig {
            epochs: 7,
            input_capsules: Some(32),
            input_capsule_dim: Some(256),
            ..Default::default()
        };
        assert_eq!(TrainConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
