use serde::{Deserialize, Serialize};

use crate::error::{DmgError, Result};

/// Which posterior estimator classifies the style id from an expected
/// rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QVariant {
    Gru,
    Lp,
}

impl QVariant {
    pub fn name(&self) -> &'static str {
        match self {
            QVariant::Gru => "gru",
            QVariant::Lp => "lp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gru" => Ok(QVariant::Gru),
            "lp" => Ok(QVariant::Lp),
            other => Err(DmgError::Config(format!(
                "unknown posterior variant {other:?} (expected gru or lp)"
            ))),
        }
    }
}

/// Network dimensions. One hidden size is shared by each encoder direction,
/// the decoder, and the posterior GRU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_src: usize,
    pub vocab_tgt: usize,
    pub embed: usize,
    pub hidden: usize,
    pub style_dim: usize,
    pub n_styles: usize,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("vocab_src", self.vocab_src),
            ("vocab_tgt", self.vocab_tgt),
            ("embed", self.embed),
            ("hidden", self.hidden),
            ("style_dim", self.style_dim),
            ("n_styles", self.n_styles),
        ] {
            if v == 0 {
                return Err(DmgError::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}
