//! Reverse-mode autodiff tape, recurrent cell kernels, optimizer, and the
//! deterministic RNG the rest of the crate builds on.

pub mod adam;
pub mod cells;
pub mod gradcheck;
pub mod rng;
pub mod tape;
pub mod tensor;

pub use adam::{adam_step, AdamState};
pub use cells::{gru_cell, lstm_cell, CellWeights};
pub use rng::Rng;
pub use tape::{softmax, Grads, NodeId, Tape};
pub use tensor::{ParamStore, Tensor};
