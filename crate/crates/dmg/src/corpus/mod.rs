//! Dataset model, preprocessing, splitting, and the synthetic corpus
//! generator.

pub mod io;
pub mod key;
pub mod song;
pub mod split;
pub mod syllabify;
pub mod synth;
pub mod tokens;

pub use io::{load_songs_jsonl, save_songs_jsonl, write_atomic};
pub use key::{estimate_key, normalize_key};
pub use song::{Dur, Key, Mode, NoteGroup, Song};
pub use split::{split_corpus, CorpusSplit};
pub use syllabify::{load_dict_tsv, syllabify, PronDict};
pub use synth::generate_synthetic_corpus;
pub use tokens::{
    build_music_tokens, pair_lines, AlignedPair, TokenVocab, EOS, LINE_SEP, START, UNK,
};
