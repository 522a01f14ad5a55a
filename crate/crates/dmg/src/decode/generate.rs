//! Constrained greedy generation from lyrics and a style id.

use crate::corpus::tokens::{
    is_structural, parse_dur_token, parse_pitch_token, TokenVocab, EOS, LINE_SEP,
};
use crate::decode::melody::{Melody, MelodyEvent};
use crate::error::{DmgError, Result};
use crate::model::net::{decode_step, encode};
use crate::model::{DmgParams, LoadedCheckpoint, START_IDX};
use crate::numcore::Tape;
use crate::training::force::force_decode_filter;

/// Source token sequence for up to two lyric lines: `|` between lines, one
/// trailing `_EOS_`.
pub fn src_from_lines(lines: &[Vec<String>]) -> Result<Vec<String>> {
    if lines.is_empty() || lines.iter().all(|l| l.is_empty()) {
        return Err(DmgError::invalid("no lyric tokens to generate from"));
    }
    let mut src = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if i > 0 {
            src.push(LINE_SEP.to_string());
        }
        src.extend(line.iter().cloned());
    }
    src.push(EOS.to_string());
    Ok(src)
}

/// Greedy decode of one network under the force filter, additionally
/// restricted to tokens the melody assembler can parse. Output is aligned
/// token-for-token with `src`.
pub fn decode_stream(
    params: &DmgParams,
    vocab_src: &TokenVocab,
    vocab_tgt: &TokenVocab,
    src: &[String],
    style_id: usize,
    music_ok: &[bool],
) -> Result<Vec<String>> {
    if music_ok.iter().filter(|&&ok| ok).count() == 0 {
        return Err(DmgError::invalid("target vocabulary has no music tokens"));
    }
    let src_idx: Vec<usize> = src.iter().map(|t| vocab_src.get_or_unk(t)).collect();
    let mut tape = Tape::new();
    let enc = encode(&mut tape, params, &src_idx, style_id)?;
    let w_embed = tape.param(&params.store, params.idx.tgt_embed);
    let mut prev = tape.row(w_embed, START_IDX)?;
    let mut h = enc.h0;
    let mut c = enc.c0;
    let mut out = Vec::with_capacity(src.len());
    for token in src {
        let step = decode_step(&mut tape, params, prev, h, c, &enc)?;
        let dist = tape.value(step.p);
        let choice = if is_structural(token) {
            force_decode_filter(token, dist, vocab_tgt)?
        } else {
            // argmax over parseable music tokens only
            dist.iter()
                .enumerate()
                .filter(|(i, _)| music_ok[*i])
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap()
        };
        out.push(vocab_tgt.token(choice).to_string());
        prev = tape.row(w_embed, choice)?;
        h = step.h;
        c = step.c;
    }
    Ok(out)
}

fn pitch_mask(vocab: &TokenVocab) -> Vec<bool> {
    (0..vocab.len())
        .map(|i| parse_pitch_token(vocab.token(i)).is_ok())
        .collect()
}

fn dur_mask(vocab: &TokenVocab) -> Vec<bool> {
    (0..vocab.len())
        .map(|i| parse_dur_token(vocab.token(i)).is_ok())
        .collect()
}

/// Generation output: both aligned token streams plus the assembled melody.
pub struct Generation {
    pub src: Vec<String>,
    pub pitch_tokens: Vec<String>,
    pub dur_tokens: Vec<String>,
    pub melody: Melody,
}

/// Zip one position's pitch and duration groups, cycling the shorter group
/// to the longer one's length.
fn zip_groups(
    pitches: &[u8],
    durs: &[crate::corpus::song::Dur],
    syllable: usize,
    mismatches: &mut usize,
) -> Vec<MelodyEvent> {
    if pitches.len() != durs.len() {
        *mismatches += 1;
    }
    let n = pitches.len().max(durs.len());
    (0..n)
        .map(|i| MelodyEvent {
            pitch: pitches[i % pitches.len()],
            duration: durs[i % durs.len()],
            syllable,
        })
        .collect()
}

pub fn generate(
    src: &[String],
    style_id: usize,
    pitch_ckpt: &LoadedCheckpoint,
    dur_ckpt: &LoadedCheckpoint,
) -> Result<Generation> {
    if pitch_ckpt.vocab_src.tokens() != dur_ckpt.vocab_src.tokens() {
        return Err(DmgError::Checkpoint(
            "pitch and duration checkpoints carry different source vocabularies".into(),
        ));
    }
    let pmask = pitch_mask(&pitch_ckpt.vocab_tgt);
    let dmask = dur_mask(&dur_ckpt.vocab_tgt);
    let pitch_tokens = decode_stream(
        &pitch_ckpt.params,
        &pitch_ckpt.vocab_src,
        &pitch_ckpt.vocab_tgt,
        src,
        style_id,
        &pmask,
    )?;
    let dur_tokens = decode_stream(
        &dur_ckpt.params,
        &dur_ckpt.vocab_src,
        &dur_ckpt.vocab_tgt,
        src,
        style_id,
        &dmask,
    )?;

    let mut melody = Melody::default();
    let mut syllable = 0usize;
    for (j, token) in src.iter().enumerate() {
        if is_structural(token) {
            continue;
        }
        let pitches = parse_pitch_token(&pitch_tokens[j])?;
        let durs = parse_dur_token(&dur_tokens[j])?;
        melody
            .events
            .extend(zip_groups(&pitches, &durs, syllable, &mut melody.arity_mismatches));
        syllable += 1;
    }
    if melody.arity_mismatches > 0 {
        log::warn!(
            "{} position(s) had pitch/duration arity mismatch; shorter group cycled",
            melody.arity_mismatches
        );
    }
    melody.check()?;
    Ok(Generation {
        src: src.to_vec(),
        pitch_tokens,
        dur_tokens,
        melody,
    })
}
