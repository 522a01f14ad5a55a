//! The DMG network: style-conditioned encoder-decoder with attention,
//! expected-embedding rollouts, posterior estimators, and the training
//! objective.

pub mod checkpoint;
pub mod config;
pub mod loss;
pub mod net;
pub mod params;
pub mod posterior;

/// Vocabulary index of `_START_` (fixed by [`crate::corpus::TokenVocab`]).
pub const START_IDX: usize = 0;

pub use checkpoint::{load_checkpoint, save_checkpoint, LoadedCheckpoint};
pub use config::{ModelConfig, QVariant};
pub use loss::{ce_decode, mim_sum, total_loss, LossParts};
pub use net::{attend, decode_step, encode, expected_embedding, rollout_expected, EncoderOutput, StepOutput};
pub use params::DmgParams;
pub use posterior::{by_name, GruPosterior, LpPosterior, PosteriorEstimator};
