//! Objective metrics over melodies and generated token streams.

use crate::corpus::synth::SCALE_PCS;
use crate::corpus::tokens::is_structural;
use crate::decode::melody::Melody;
use crate::error::{DmgError, Result};
use crate::model::posterior::PosteriorEstimator;
use crate::model::DmgParams;
use crate::numcore::Tape;

/// Fraction of note events whose pitch-class falls in the C-major scale.
pub fn tonality_score(melody: &Melody) -> Result<f64> {
    if melody.events.is_empty() {
        return Err(DmgError::invalid("tonality score of an empty melody"));
    }
    let in_scale = melody
        .events
        .iter()
        .filter(|e| SCALE_PCS.contains(&(e.pitch % 12)))
        .count();
    Ok(in_scale as f64 / melody.events.len() as f64)
}

/// Counts of MIDI pitches over a set of melodies, optionally restricted to
/// one generating style.
pub fn pitch_histogram(melodies: &[(Melody, usize)], style: Option<usize>) -> Result<[u64; 128]> {
    let mut bins = [0u64; 128];
    let mut seen = false;
    for (melody, s) in melodies {
        if style.map_or(false, |want| *s != want) {
            continue;
        }
        seen = true;
        for ev in &melody.events {
            bins[ev.pitch as usize] += 1;
        }
    }
    if !seen {
        return Err(DmgError::invalid("no melodies matched the histogram filter"));
    }
    Ok(bins)
}

pub fn histogram_csv(bins: &[u64; 128]) -> String {
    let mut out = String::from("pitch,count\n");
    for (pitch, count) in bins.iter().enumerate() {
        out.push_str(&format!("{pitch},{count}\n"));
    }
    out
}

/// Two-column whitespace-separated form, plottable with `plot "f" with boxes`.
pub fn histogram_gnuplot(bins: &[u64; 128]) -> String {
    let mut out = String::new();
    for (pitch, count) in bins.iter().enumerate() {
        out.push_str(&format!("{pitch} {count}\n"));
    }
    out
}

/// Jensen–Shannon divergence (base 2) between two normalized histograms.
pub fn style_divergence(a: &[u64], b: &[u64]) -> Result<f64> {
    let ta: u64 = a.iter().sum();
    let tb: u64 = b.iter().sum();
    if ta == 0 || tb == 0 {
        return Err(DmgError::invalid("zero-total histogram in divergence"));
    }
    if a.len() != b.len() {
        return Err(DmgError::invalid("histogram lengths differ"));
    }
    let mut js = 0.0;
    for (&ca, &cb) in a.iter().zip(b) {
        let p = ca as f64 / ta as f64;
        let q = cb as f64 / tb as f64;
        let m = 0.5 * (p + q);
        if p > 0.0 {
            js += 0.5 * p * (p / m).log2();
        }
        if q > 0.0 {
            js += 0.5 * q * (q / m).log2();
        }
    }
    Ok(js.clamp(0.0, 1.0))
}

/// Fraction of generations where both output streams are token-aligned with
/// the source: same length, structural tokens reproduced in place.
pub fn alignment_rate(items: &[(Vec<String>, Vec<String>, Vec<String>)]) -> Result<f64> {
    if items.is_empty() {
        return Err(DmgError::invalid("alignment rate of an empty set"));
    }
    let aligned = items
        .iter()
        .filter(|(src, pitch, dur)| {
            pitch.len() == src.len()
                && dur.len() == src.len()
                && src.iter().enumerate().all(|(j, t)| {
                    !is_structural(t) || (pitch[j] == *t && dur[j] == *t)
                })
        })
        .count();
    Ok(aligned as f64 / items.len() as f64)
}

/// Fraction of target sequences the posterior classifies back to their
/// conditioning style id. Sequences are target-vocabulary indices.
pub fn posterior_accuracy(
    params: &DmgParams,
    q: &dyn PosteriorEstimator,
    items: &[(Vec<usize>, usize)],
) -> Result<f64> {
    if params.cfg.n_styles < 2 {
        return Err(DmgError::invalid("posterior accuracy needs at least 2 styles"));
    }
    if items.is_empty() {
        return Err(DmgError::invalid("posterior accuracy of an empty set"));
    }
    let mut hits = 0usize;
    for (seq, style) in items {
        let mut tape = Tape::new();
        let w_embed = tape.param(&params.store, params.idx.tgt_embed);
        let embeds: Vec<_> = seq
            .iter()
            .map(|&idx| tape.row(w_embed, idx))
            .collect::<Result<_>>()?;
        let logq = q.log_posterior(&mut tape, params, &embeds)?;
        let vals = tape.value(logq);
        let argmax = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if argmax == *style {
            hits += 1;
        }
    }
    Ok(hits as f64 / items.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::melody::MelodyEvent;
    use crate::model::config::{ModelConfig, QVariant};
    use crate::model::posterior::for_variant;
    use crate::numcore::Rng;
    use num_rational::Ratio;

    fn melody(pitches: &[u8]) -> Melody {
        Melody {
            events: pitches
                .iter()
                .map(|&p| MelodyEvent {
                    pitch: p,
                    duration: Ratio::from_integer(1),
                    syllable: 0,
                })
                .collect(),
            arity_mismatches: 0,
        }
    }

    #[test]
    fn tonality_counts_scale_membership() {
        // C4 E4 F#4 G4: only F#4 is off-scale
        assert_eq!(tonality_score(&melody(&[60, 64, 66, 67])).unwrap(), 0.75);
        assert_eq!(tonality_score(&melody(&[60, 62, 64])).unwrap(), 1.0);
        assert!(tonality_score(&Melody::default()).is_err());
    }

    #[test]
    fn tonality_octave_invariant() {
        let base = melody(&[60, 66, 67, 69]);
        let shifted = melody(&[72, 78, 79, 81]);
        assert_eq!(
            tonality_score(&base).unwrap(),
            tonality_score(&shifted).unwrap()
        );
    }

    #[test]
    fn histogram_counts_and_filter() {
        let set = vec![(melody(&[60, 60]), 0), (melody(&[72]), 1)];
        let all = pitch_histogram(&set, None).unwrap();
        assert_eq!(all[60], 2);
        assert_eq!(all[72], 1);
        assert_eq!(all.iter().sum::<u64>(), 3);
        let s0 = pitch_histogram(&set, Some(0)).unwrap();
        assert_eq!(s0[60], 2);
        assert_eq!(s0[72], 0);
        assert!(pitch_histogram(&set, Some(5)).is_err());
        assert!(pitch_histogram(&[], None).is_err());
    }

    #[test]
    fn histogram_text_forms() {
        let set = vec![(melody(&[0]), 0)];
        let bins = pitch_histogram(&set, None).unwrap();
        let csv = histogram_csv(&bins);
        assert!(csv.starts_with("pitch,count\n0,1\n1,0\n"));
        assert_eq!(csv.lines().count(), 129);
        let gp = histogram_gnuplot(&bins);
        assert!(gp.starts_with("0 1\n1 0\n"));
        assert_eq!(gp.lines().count(), 128);
    }

    #[test]
    fn divergence_endpoints() {
        assert_eq!(style_divergence(&[3, 1], &[3, 1]).unwrap(), 0.0);
        assert!((style_divergence(&[5, 0], &[0, 7]).unwrap() - 1.0).abs() < 1e-12);
        assert!(style_divergence(&[0, 0], &[1, 1]).is_err());
    }

    #[test]
    fn divergence_hand_case() {
        // JS({1,0}, {.5,.5}) = 1 - 0.75*log2(3) + 0.5 ≈ 0.311278
        let js = style_divergence(&[2, 0], &[1, 1]).unwrap();
        let expect = 0.5 * (2.0f64 / 1.5).log2() + 0.25 * (1.0f64 / 1.5).log2()
            + 0.25 * (1.0f64 / 0.5).log2();
        assert!((js - expect).abs() < 1e-12);
        assert!((js - 0.3113).abs() < 5e-4);
    }

    #[test]
    fn alignment_checks_structure() {
        let good = (
            vec!["a".into(), "|".into(), "b".into(), "_EOS_".into()],
            vec!["60".into(), "|".into(), "62".into(), "_EOS_".into()],
            vec!["1".into(), "|".into(), "1/2".into(), "_EOS_".into()],
        );
        let short = (
            vec!["a".into(), "_EOS_".into()],
            vec!["60".into()],
            vec!["1".into(), "_EOS_".into()],
        );
        let misplaced = (
            vec!["a".into(), "_EOS_".into()],
            vec!["60".into(), "62".into()],
            vec!["1".into(), "_EOS_".into()],
        );
        assert_eq!(alignment_rate(&[good.clone()]).unwrap(), 1.0);
        assert_eq!(
            alignment_rate(&[good, short, misplaced]).unwrap(),
            1.0 / 3.0
        );
        assert!(alignment_rate(&[]).is_err());
    }

    #[test]
    fn posterior_accuracy_bounds() {
        let cfg = ModelConfig {
            vocab_src: 6,
            vocab_tgt: 6,
            embed: 4,
            hidden: 4,
            style_dim: 3,
            n_styles: 2,
        };
        let params = DmgParams::init(cfg, &mut Rng::new(11));
        let q = for_variant(QVariant::Gru);
        let items: Vec<(Vec<usize>, usize)> = (0..20)
            .map(|i| (vec![i % 6, (i + 1) % 6, (i + 2) % 6], i % 2))
            .collect();
        let acc = posterior_accuracy(&params, q.as_ref(), &items).unwrap();
        assert!((0.0..=1.0).contains(&acc));
        // deterministic
        assert_eq!(acc, posterior_accuracy(&params, q.as_ref(), &items).unwrap());
    }
}
