//! Key estimation from duration-weighted pitch-class histograms and
//! normalization into C major / A minor.

use crate::corpus::song::{Key, Mode, Song};
use crate::error::{DmgError, Result};

/// Krumhansl-Kessler major profile, index 0 = tonic.
pub const KK_MAJOR: [f64; 12] = [
    6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88,
];

/// Krumhansl-Kessler minor profile, index 0 = tonic.
pub const KK_MINOR: [f64; 12] = [
    6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17,
];

/// Duration-weighted pitch-class histogram of a song.
pub fn pitch_class_histogram(song: &Song) -> [f64; 12] {
    let mut hist = [0.0; 12];
    for group in &song.notes {
        for &(pitch, dur) in group {
            hist[(pitch % 12) as usize] += *dur.numer() as f64 / *dur.denom() as f64;
        }
    }
    hist
}

fn pearson(a: &[f64; 12], b: &[f64; 12]) -> f64 {
    let ma = a.iter().sum::<f64>() / 12.0;
    let mb = b.iter().sum::<f64>() / 12.0;
    let mut num = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..12 {
        let da = a[i] - ma;
        let db = b[i] - mb;
        num += da * db;
        va += da * da;
        vb += db * db;
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    num / (va * vb).sqrt()
}

fn profile_for(key: Key) -> [f64; 12] {
    let base = match key.mode {
        Mode::Major => &KK_MAJOR,
        Mode::Minor => &KK_MINOR,
    };
    // rotated[pc] = base[(pc - tonic) mod 12]
    let mut rotated = [0.0; 12];
    for pc in 0..12 {
        rotated[pc] = base[(pc + 12 - key.tonic as usize) % 12];
    }
    rotated
}

/// Best-correlating of the 24 keys. Ties break to the lowest tonic
/// pitch-class, major before minor.
pub fn estimate_key(song: &Song) -> Result<Key> {
    if song.notes.iter().all(|g| g.is_empty()) || song.notes.is_empty() {
        return Err(DmgError::Corpus(format!("song {}: no notes", song.id)));
    }
    let hist = pitch_class_histogram(song);
    let mut best: Option<(f64, Key)> = None;
    for tonic in 0..12u8 {
        for mode in [Mode::Major, Mode::Minor] {
            let key = Key::new(tonic, mode);
            let score = pearson(&hist, &profile_for(key));
            match best {
                Some((s, _)) if score <= s => {}
                _ => best = Some((score, key)),
            }
        }
    }
    Ok(best.unwrap().1)
}

/// Semitone offset in (-6, +6] moving `tonic` onto `target` pitch-class.
fn minimal_offset(tonic: u8, target: u8) -> i32 {
    let d = ((target as i32 - tonic as i32).rem_euclid(12)) as i32;
    if d > 6 {
        d - 12
    } else {
        d
    }
}

/// Transpose so major songs have tonic C and minor songs tonic A. Estimates
/// the key when it is unannotated. Notes pushed out of 0-127 are shifted
/// back by octaves.
pub fn normalize_key(song: &Song) -> Result<Song> {
    let key = match song.key {
        Some(k) => k,
        None => estimate_key(song)?,
    };
    let target = match key.mode {
        Mode::Major => 0u8, // C
        Mode::Minor => 9u8, // A
    };
    let offset = minimal_offset(key.tonic, target);
    let mut out = song.clone();
    out.key = Some(Key::new(target, key.mode));
    for group in &mut out.notes {
        for note in group.iter_mut() {
            let mut p = note.0 as i32 + offset;
            while p < 0 {
                p += 12;
            }
            while p > 127 {
                p -= 12;
            }
            note.0 = p as u8;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::song::Dur;
    use num_rational::Ratio;

    fn song_from_notes(notes: Vec<(u8, Dur)>) -> Song {
        Song {
            id: "t".into(),
            lines: vec![notes.iter().map(|_| "la".to_string()).collect()],
            notes: notes.into_iter().map(|n| vec![n]).collect(),
            key: None,
            style: None,
        }
    }

    // Brute-force oracle: recompute the correlation for all 24 keys from
    // scratch with an independently written rotation.
    fn oracle(song: &Song) -> Key {
        let hist = pitch_class_histogram(song);
        let mut best_score = f64::NEG_INFINITY;
        let mut best_key = Key::new(0, Mode::Major);
        for tonic in 0..12u8 {
            for mode in [Mode::Major, Mode::Minor] {
                let base = match mode {
                    Mode::Major => KK_MAJOR,
                    Mode::Minor => KK_MINOR,
                };
                let shifted: Vec<f64> = (0..12)
                    .map(|pc| hist[(pc + tonic as usize) % 12])
                    .collect();
                // pearson(shifted hist, base profile)
                let mh = shifted.iter().sum::<f64>() / 12.0;
                let mp = base.iter().sum::<f64>() / 12.0;
                let mut num = 0.0;
                let mut vh = 0.0;
                let mut vp = 0.0;
                for i in 0..12 {
                    num += (shifted[i] - mh) * (base[i] - mp);
                    vh += (shifted[i] - mh).powi(2);
                    vp += (base[i] - mp).powi(2);
                }
                let score = if vh == 0.0 { 0.0 } else { num / (vh * vp).sqrt() };
                if score > best_score {
                    best_score = score;
                    best_key = Key::new(tonic, mode);
                }
            }
        }
        best_key
    }

    fn c_major_song() -> Song {
        // C-major scale with heavy tonic-triad emphasis
        let whole = Ratio::from_integer(1);
        let notes = vec![
            (60, Ratio::from_integer(2)),
            (64, whole),
            (67, whole),
            (62, Ratio::new(1, 2)),
            (65, Ratio::new(1, 2)),
            (69, Ratio::new(1, 2)),
            (71, Ratio::new(1, 2)),
            (60, Ratio::from_integer(2)),
        ];
        song_from_notes(notes)
    }

    #[test]
    fn c_tonic_emphasis_is_c_major() {
        let song = c_major_song();
        let key = estimate_key(&song).unwrap();
        assert_eq!(key, Key::new(0, Mode::Major));
        assert_eq!(key, oracle(&song));
    }

    #[test]
    fn transposition_equivariance() {
        let mut song = c_major_song();
        for g in &mut song.notes {
            for n in g.iter_mut() {
                n.0 += 7;
            }
        }
        let key = estimate_key(&song).unwrap();
        assert_eq!(key, Key::new(7, Mode::Major)); // G major
        assert_eq!(key, oracle(&song));
    }

    #[test]
    fn minor_profile_weighted_song_is_a_minor() {
        // Durations proportional to the A-rotated minor profile: the
        // histogram correlates perfectly with A minor.
        let notes: Vec<(u8, Dur)> = (0..12u8)
            .map(|deg| {
                let weight = (KK_MINOR[deg as usize] * 100.0).round() as i64;
                (57 + deg, Ratio::new(weight, 100))
            })
            .collect();
        let song = song_from_notes(notes);
        let key = estimate_key(&song).unwrap();
        assert_eq!(key, Key::new(9, Mode::Minor));
        assert_eq!(key, oracle(&song));
    }

    #[test]
    fn empty_song_is_error() {
        let song = Song {
            id: "e".into(),
            lines: vec![],
            notes: vec![],
            key: None,
            style: None,
        };
        assert!(estimate_key(&song).is_err());
    }

    #[test]
    fn normalize_g_major_moves_tonic_to_c() {
        let mut song = c_major_song();
        for g in &mut song.notes {
            for n in g.iter_mut() {
                n.0 += 7;
            }
        }
        let normalized = normalize_key(&song).unwrap();
        assert_eq!(normalized.key, Some(Key::new(0, Mode::Major)));
        // minimal offset: G (7) -> C via +5, staying inside (-6, +6]
        assert_eq!(normalized.notes[0][0].0, song.notes[0][0].0 + 5);
        assert_eq!(estimate_key(&normalized).unwrap(), Key::new(0, Mode::Major));
    }

    #[test]
    fn normalize_a_minor_is_identity() {
        let notes: Vec<(u8, Dur)> = (0..12u8)
            .map(|deg| {
                let weight = (KK_MINOR[deg as usize] * 100.0).round() as i64;
                (57 + deg, Ratio::new(weight, 100))
            })
            .collect();
        let song = song_from_notes(notes);
        let normalized = normalize_key(&song).unwrap();
        assert_eq!(normalized.notes, song.notes);
        assert_eq!(normalized.key, Some(Key::new(9, Mode::Minor)));
    }

    #[test]
    fn normalize_b_major_shifts_up_one() {
        assert_eq!(minimal_offset(11, 0), 1);
        assert_eq!(minimal_offset(7, 0), 5);
        assert_eq!(minimal_offset(6, 0), 6);
        assert_eq!(minimal_offset(5, 0), -5);
    }
}
