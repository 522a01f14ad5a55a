pub mod generate;
pub mod melody;
pub mod midi;

pub use generate::{decode_stream, generate, src_from_lines, Generation};
pub use melody::{Melody, MelodyEvent};
pub use midi::to_midi_bytes;
