//! Training: sampling schedule, force decoding, the epoch loop, and fit.

pub mod config;
pub mod data;
pub mod force;
pub mod run;
pub mod schedule;

pub use config::TrainConfig;
pub use data::{build_src_vocab, build_tgt_vocab, encode_pairs, EncodedPair, TargetStream};
pub use force::force_decode_filter;
pub use run::{fit, train_epoch, train_network, validation_ce, EpochMetrics, FitReport};
pub use schedule::{choose_input_token, sampling_probability, ScheduleState};
