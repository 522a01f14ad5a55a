//! Synthetic desk-scale corpus: C-major songs whose register depends on the
//! generating style, standing in for licensed song data.

use num_rational::Ratio;

use crate::corpus::song::{Dur, NoteGroup, Song};
use crate::error::{DmgError, Result};
use crate::numcore::Rng;

/// C-major scale pitch classes.
pub const SCALE_PCS: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];

const SYLLABLES: [&str; 20] = [
    "yue", "liang", "ming", "xin", "shan", "shui", "feng", "hua", "xue", "ye",
    "tian", "di", "ren", "jian", "qing", "meng", "hai", "yun", "chun", "qiu",
];

fn durations() -> [Dur; 4] {
    [
        Ratio::new(1, 4),
        Ratio::new(1, 2),
        Ratio::from_integer(1),
        Ratio::from_integer(2),
    ]
}

/// Scale pitches within about an octave of the style's register center.
fn scale_around(center: u8) -> Vec<u8> {
    let lo = center.saturating_sub(8);
    let hi = center + 9;
    (lo..=hi)
        .filter(|p| SCALE_PCS.contains(&(p % 12)))
        .collect()
}

fn nearest_index(pitches: &[u8], target: u8) -> usize {
    pitches
        .iter()
        .enumerate()
        .min_by_key(|(_, &p)| (p as i32 - target as i32).abs())
        .map(|(i, _)| i)
        .unwrap()
}

/// Generate `n_songs` songs over `k_styles` register-separated styles.
/// Style k is centered near C4 + 12k; every pitch stays on the C-major
/// scale and phrases lean on the tonic so key estimation lands on C major.
pub fn generate_synthetic_corpus(n_songs: usize, k_styles: usize, seed: u64) -> Result<Vec<Song>> {
    if n_songs < 10 {
        return Err(DmgError::Corpus("need at least 10 songs".into()));
    }
    if k_styles == 0 {
        return Err(DmgError::Corpus("need at least one style".into()));
    }
    let mut rng = Rng::new(seed);
    let durs = durations();
    let mut songs = Vec::with_capacity(n_songs);

    for song_idx in 0..n_songs {
        let style = song_idx % k_styles;
        let center = 60 + 12 * style as u8;
        let pitches = scale_around(center);
        let tonic_idx = nearest_index(&pitches, center);

        let n_lines = 2 + rng.below(5); // 2..=6
        let mut lines = Vec::with_capacity(n_lines);
        let mut notes: Vec<NoteGroup> = Vec::new();

        for _ in 0..n_lines {
            let len = 4 + rng.below(7); // 4..=10
            let line: Vec<String> = (0..len)
                .map(|_| SYLLABLES[rng.below(SYLLABLES.len())].to_string())
                .collect();

            // random walk over scale steps, pulled toward the tonic
            let mut idx = tonic_idx;
            for pos in 0..len {
                let last = pos == len - 1;
                if last {
                    // cadence on the tonic with a long value
                    notes.push(vec![(pitches[tonic_idx], Ratio::from_integer(2))]);
                    continue;
                }
                let step = rng.below(5) as i32 - 2;
                idx = (idx as i32 + step).clamp(0, pitches.len() as i32 - 1) as usize;
                // drift back toward the tonic half of the time
                if rng.next_f64() < 0.5 && idx != tonic_idx {
                    idx = if idx > tonic_idx { idx - 1 } else { idx + 1 };
                }
                let pitch = pitches[idx];
                let tonic_triad = matches!((pitch % 12 + 12 - center % 12) % 12, 0 | 4 | 7);
                let dur = if tonic_triad {
                    durs[1 + rng.below(3)] // longer values on chord tones
                } else {
                    durs[rng.below(3)]
                };
                if rng.next_f64() < 0.1 {
                    // occasional two-note melisma on one syllable
                    let second = pitches[(idx + 1).min(pitches.len() - 1)];
                    notes.push(vec![(pitch, dur), (second, durs[rng.below(2)])]);
                } else {
                    notes.push(vec![(pitch, dur)]);
                }
            }
            lines.push(line);
        }

        songs.push(Song {
            id: format!("synth-{song_idx:04}"),
            lines,
            notes,
            key: None,
            style: Some(style),
        });
    }
    Ok(songs)
}
