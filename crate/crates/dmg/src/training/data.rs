use crate::corpus::tokens::{AlignedPair, TokenVocab};

/// Which target stream a network is trained on; the pitch and duration
/// networks share code but never weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetStream {
    Pitch,
    Duration,
}

impl TargetStream {
    pub fn name(&self) -> &'static str {
        match self {
            TargetStream::Pitch => "pitch",
            TargetStream::Duration => "duration",
        }
    }

    pub fn tokens<'a>(&self, pair: &'a AlignedPair) -> &'a [String] {
        match self {
            TargetStream::Pitch => &pair.tgt_pitch,
            TargetStream::Duration => &pair.tgt_dur,
        }
    }
}

/// One aligned pair mapped into vocabulary indices.
#[derive(Debug, Clone)]
pub struct EncodedPair {
    pub src_tokens: Vec<String>,
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    pub style: Option<usize>,
}

/// Source vocabulary over every pair's lyric tokens.
pub fn build_src_vocab(pair_sets: &[&[AlignedPair]]) -> TokenVocab {
    let mut v = TokenVocab::new();
    for pairs in pair_sets {
        for p in *pairs {
            for t in &p.src {
                v.intern(t);
            }
        }
    }
    v
}

/// Target vocabulary over one music-token stream.
pub fn build_tgt_vocab(pair_sets: &[&[AlignedPair]], stream: TargetStream) -> TokenVocab {
    let mut v = TokenVocab::new();
    for pairs in pair_sets {
        for p in *pairs {
            for t in stream.tokens(p) {
                v.intern(t);
            }
        }
    }
    v
}

/// Index pairs against the vocabularies, dropping any longer than `max_len`.
pub fn encode_pairs(
    pairs: &[AlignedPair],
    stream: TargetStream,
    vocab_src: &TokenVocab,
    vocab_tgt: &TokenVocab,
    max_len: usize,
) -> Vec<EncodedPair> {
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs {
        if p.src.len() > max_len {
            log::warn!(
                "skipping pair from {} with length {} > max_len {}",
                p.song_id,
                p.src.len(),
                max_len
            );
            continue;
        }
        out.push(EncodedPair {
            src_tokens: p.src.clone(),
            src: p.src.iter().map(|t| vocab_src.get_or_unk(t)).collect(),
            tgt: stream
                .tokens(p)
                .iter()
                .map(|t| vocab_tgt.get_or_unk(t))
                .collect(),
            style: p.style,
        });
    }
    out
}
