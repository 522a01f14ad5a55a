use serde::{Deserialize, Serialize};

use crate::error::{DmgError, Result};
use crate::model::QVariant;

/// Everything a training run needs; a seed plus this config fully determine
/// the resulting weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Balance factor between cross-entropy and the MI regularizer.
    pub lambda: f64,
    /// Decay rate of the sampling schedule.
    pub mu: f64,
    /// Number of styles K.
    pub k_styles: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub q_variant: QVariant,
    /// Pairs longer than this are skipped.
    pub max_len: usize,
    pub hidden: usize,
    pub embed: usize,
    pub style_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 0.5,
            mu: 12.0,
            k_styles: 2,
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 16,
            seed: 0,
            q_variant: QVariant::Gru,
            max_len: 64,
            hidden: 64,
            embed: 32,
            style_dim: 8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(DmgError::Config(format!(
                "lambda must be in [0, 1), got {}",
                self.lambda
            )));
        }
        if self.mu <= 0.0 {
            return Err(DmgError::Config("mu must be positive".into()));
        }
        if self.k_styles == 0 {
            return Err(DmgError::Config("k_styles must be at least 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(DmgError::Config("learning_rate must be positive".into()));
        }
        for (name, v) in [
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("max_len", self.max_len),
            ("hidden", self.hidden),
            ("embed", self.embed),
            ("style_dim", self.style_dim),
        ] {
            if v == 0 {
                return Err(DmgError::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<TrainConfig> {
        let cfg: TrainConfig = serde_json::from_slice(&std::fs::read(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        TrainConfig::default().validate().unwrap();
    }

    #[test]
    fn bad_lambda_rejected() {
        let cfg = TrainConfig {
            lambda: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg: TrainConfig = serde_json::from_str(r#"{"lambda": 0.3, "epochs": 5}"#).unwrap();
        assert_eq!(cfg.lambda, 0.3);
        assert_eq!(cfg.epochs, 5);
        assert_eq!(cfg.batch_size, TrainConfig::default().batch_size);
    }
}
