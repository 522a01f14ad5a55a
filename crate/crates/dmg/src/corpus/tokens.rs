//! Token vocabulary, composite music tokens, and source/target alignment.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::song::{parse_dur, render_dur, NoteGroup, Song};
use crate::error::{DmgError, Result};

pub const START: &str = "_START_";
pub const EOS: &str = "_EOS_";
pub const LINE_SEP: &str = "|";
pub const UNK: &str = "_UNK_";

pub fn is_structural(token: &str) -> bool {
    token == LINE_SEP || token == EOS
}

/// Bidirectional token <-> dense index map with the reserved entries always
/// present at fixed positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenVocab {
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TokenVocab {
    pub fn new() -> Self {
        let mut v = TokenVocab {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for t in [START, EOS, LINE_SEP, UNK] {
            v.intern(t);
        }
        v
    }

    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut v = TokenVocab::new();
        for (i, t) in tokens.iter().enumerate() {
            if i < 4 {
                if v.tokens[i] != *t {
                    return Err(DmgError::Corpus(format!(
                        "vocab missing reserved token at {i}: {t:?}"
                    )));
                }
            } else {
                v.intern(t);
            }
        }
        Ok(v)
    }

    pub fn intern(&mut self, token: &str) -> usize {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), self.tokens.len() - 1);
        self.tokens.len() - 1
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Index of a token, falling back to `_UNK_`.
    pub fn get_or_unk(&self, token: &str) -> usize {
        self.get(token).unwrap_or_else(|| self.get(UNK).unwrap())
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // reserved tokens are always present
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn start_idx(&self) -> usize {
        0
    }
    pub fn eos_idx(&self) -> usize {
        1
    }
    pub fn sep_idx(&self) -> usize {
        2
    }

    pub fn structural_indices(&self) -> [usize; 2] {
        [self.sep_idx(), self.eos_idx()]
    }
}

impl Default for TokenVocab {
    fn default() -> Self {
        TokenVocab::new()
    }
}

/// Rebuild the token->index map after deserialization.
pub fn rehydrate(vocab: &mut TokenVocab) {
    vocab.index = vocab
        .tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
}

/// Comma-join the notes sung on one syllable into a pitch token and a
/// duration token.
pub fn build_music_tokens(group: &NoteGroup) -> Result<(String, String)> {
    if group.is_empty() {
        return Err(DmgError::Corpus("empty note group".into()));
    }
    let pitch = group
        .iter()
        .map(|(p, _)| p.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let dur = group
        .iter()
        .map(|(_, d)| render_dur(*d))
        .collect::<Vec<_>>()
        .join(",");
    Ok((pitch, dur))
}

/// Inverse of [`build_music_tokens`]; the two tokens may carry different
/// arities, which the caller reconciles.
pub fn parse_pitch_token(token: &str) -> Result<Vec<u8>> {
    token
        .split(',')
        .map(|p| {
            p.parse::<u8>()
                .map_err(|_| DmgError::Corpus(format!("bad pitch token {token:?}")))
        })
        .collect()
}

pub fn parse_dur_token(token: &str) -> Result<Vec<crate::corpus::song::Dur>> {
    token.split(',').map(parse_dur).collect()
}

/// Source syllables for two consecutive lines plus the matching pitch and
/// duration streams, all the same length, `|` at identical indices and one
/// trailing `_EOS_`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub song_id: String,
    pub style: Option<usize>,
    pub src: Vec<String>,
    pub tgt_pitch: Vec<String>,
    pub tgt_dur: Vec<String>,
}

impl AlignedPair {
    pub fn check(&self) -> Result<()> {
        if self.src.len() != self.tgt_pitch.len() || self.src.len() != self.tgt_dur.len() {
            return Err(DmgError::Corpus(format!(
                "pair in {}: lengths {}/{}/{}",
                self.song_id,
                self.src.len(),
                self.tgt_pitch.len(),
                self.tgt_dur.len()
            )));
        }
        for i in 0..self.src.len() {
            let structural = [&self.src[i], &self.tgt_pitch[i], &self.tgt_dur[i]];
            let sep = structural.iter().filter(|t| t.as_str() == LINE_SEP).count();
            let eos = structural.iter().filter(|t| t.as_str() == EOS).count();
            if sep != 0 && sep != 3 {
                return Err(DmgError::Corpus(format!("misaligned '|' at {i}")));
            }
            if eos != 0 && eos != 3 {
                return Err(DmgError::Corpus(format!("misaligned '_EOS_' at {i}")));
            }
            let want_eos = i == self.src.len() - 1;
            if (eos == 3) != want_eos {
                return Err(DmgError::Corpus(format!("'_EOS_' at {i} not terminal")));
            }
        }
        Ok(())
    }
}

/// Emit one [`AlignedPair`] per pair of neighboring lines: (1,2), (2,3), ...
/// A one-line song yields the line alone plus `_EOS_`.
pub fn pair_lines(song: &Song) -> Result<Vec<AlignedPair>> {
    song.validate()?;
    if song.lines.is_empty() {
        return Err(DmgError::Corpus(format!("song {} has no lines", song.id)));
    }

    // note-group tokens laid out per line
    let mut line_tokens: Vec<Vec<(String, String)>> = Vec::new();
    let mut cursor = 0;
    for line in &song.lines {
        let mut toks = Vec::with_capacity(line.len());
        for _ in line {
            toks.push(build_music_tokens(&song.notes[cursor])?);
            cursor += 1;
        }
        line_tokens.push(toks);
    }

    let build = |lines: &[usize]| -> AlignedPair {
        let mut src = Vec::new();
        let mut pitch = Vec::new();
        let mut dur = Vec::new();
        for (n, &li) in lines.iter().enumerate() {
            if n > 0 {
                src.push(LINE_SEP.to_string());
                pitch.push(LINE_SEP.to_string());
                dur.push(LINE_SEP.to_string());
            }
            for (s, (p, d)) in song.lines[li].iter().zip(&line_tokens[li]) {
                src.push(s.clone());
                pitch.push(p.clone());
                dur.push(d.clone());
            }
        }
        src.push(EOS.to_string());
        pitch.push(EOS.to_string());
        dur.push(EOS.to_string());
        AlignedPair {
            song_id: song.id.clone(),
            style: song.style,
            src,
            tgt_pitch: pitch,
            tgt_dur: dur,
        }
    };

    let pairs = if song.lines.len() == 1 {
        vec![build(&[0])]
    } else {
        (0..song.lines.len() - 1).map(|i| build(&[i, i + 1])).collect()
    };
    for p in &pairs {
        p.check()?;
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn vocab_reserved_tokens() {
        let v = TokenVocab::new();
        assert_eq!(v.get(START), Some(0));
        assert_eq!(v.get(EOS), Some(1));
        assert_eq!(v.get(LINE_SEP), Some(2));
        assert_eq!(v.get(UNK), Some(3));
    }

    #[test]
    fn vocab_round_trip() {
        let mut v = TokenVocab::new();
        for t in ["60", "62", "1/2", "60,64"] {
            v.intern(t);
        }
        for i in 0..v.len() {
            assert_eq!(v.get(v.token(i)).unwrap(), i);
        }
    }

    #[test]
    fn single_note_tokens_are_bare() {
        let g = vec![(60u8, Ratio::new(1, 2))];
        assert_eq!(build_music_tokens(&g).unwrap(), ("60".into(), "1/2".into()));
    }

    #[test]
    fn multi_note_group_joins_with_comma() {
        let g = vec![(60u8, Ratio::new(1, 4)), (62u8, Ratio::new(1, 4))];
        assert_eq!(
            build_music_tokens(&g).unwrap(),
            ("60,62".into(), "1/4,1/4".into())
        );
    }

    #[test]
    fn empty_group_is_error() {
        assert!(build_music_tokens(&vec![]).is_err());
    }

    #[test]
    fn token_round_trip_random_groups() {
        let mut rng = crate::numcore::Rng::new(17);
        let durs = [Ratio::new(1, 4), Ratio::new(1, 2), Ratio::from_integer(1)];
        for _ in 0..200 {
            let n = 1 + rng.below(3);
            let g: NoteGroup = (0..n)
                .map(|_| (40 + rng.below(60) as u8, durs[rng.below(3)]))
                .collect();
            let (pt, dt) = build_music_tokens(&g).unwrap();
            let pitches = parse_pitch_token(&pt).unwrap();
            let durations = parse_dur_token(&dt).unwrap();
            let back: NoteGroup = pitches.into_iter().zip(durations).collect();
            assert_eq!(back, g);
        }
    }

    fn song(lines: &[&[&str]]) -> Song {
        let mut notes = Vec::new();
        for l in lines {
            for _ in l.iter() {
                notes.push(vec![(60u8, Ratio::from_integer(1))]);
            }
        }
        Song {
            id: "s".into(),
            lines: lines
                .iter()
                .map(|l| l.iter().map(|s| s.to_string()).collect())
                .collect(),
            notes,
            key: None,
            style: None,
        }
    }

    #[test]
    fn three_lines_give_two_pairs() {
        let s = song(&[&["a", "b"], &["c"], &["d", "e"]]);
        let pairs = pair_lines(&s).unwrap();
        assert_eq!(pairs.len(), 2);
    }

    #[test]
    fn pair_length_counts_sep_and_eos() {
        let s = song(&[
            &["a", "b", "c", "d", "e"],
            &["f", "g", "h", "i"],
        ]);
        let pairs = pair_lines(&s).unwrap();
        assert_eq!(pairs[0].src.len(), 5 + 1 + 4 + 1);
        assert_eq!(pairs[0].src[5], LINE_SEP);
        assert_eq!(pairs[0].src[10], EOS);
    }

    #[test]
    fn single_line_song_emits_line_plus_eos() {
        let s = song(&[&["a", "b", "c"]]);
        let pairs = pair_lines(&s).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].src, vec!["a", "b", "c", EOS]);
    }
}
