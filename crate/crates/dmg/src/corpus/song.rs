use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{DmgError, Result};

pub type Dur = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Major,
    Minor,
}

/// Tonic pitch-class (0..12) plus mode; 24 keys total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key {
    pub tonic: u8,
    pub mode: Mode,
}

impl Key {
    pub fn new(tonic: u8, mode: Mode) -> Self {
        Key { tonic: tonic % 12, mode }
    }

    pub fn parse(s: &str) -> Result<Key> {
        let (tonic_s, mode_s) = s
            .split_once(':')
            .ok_or_else(|| DmgError::Corpus(format!("bad key string {s:?}")))?;
        let tonic = match tonic_s {
            "C" => 0,
            "C#" | "Db" => 1,
            "D" => 2,
            "D#" | "Eb" => 3,
            "E" => 4,
            "F" => 5,
            "F#" | "Gb" => 6,
            "G" => 7,
            "G#" | "Ab" => 8,
            "A" => 9,
            "A#" | "Bb" => 10,
            "B" => 11,
            _ => return Err(DmgError::Corpus(format!("unknown tonic {tonic_s:?}"))),
        };
        let mode = match mode_s {
            "maj" => Mode::Major,
            "min" => Mode::Minor,
            _ => return Err(DmgError::Corpus(format!("unknown mode {mode_s:?}"))),
        };
        Ok(Key::new(tonic, mode))
    }

    pub fn render(&self) -> String {
        const NAMES: [&str; 12] = [
            "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
        ];
        let mode = match self.mode {
            Mode::Major => "maj",
            Mode::Minor => "min",
        };
        format!("{}:{}", NAMES[self.tonic as usize], mode)
    }
}

/// Notes sung on one syllable.
pub type NoteGroup = Vec<(u8, Dur)>;

/// One song: lyric lines, one note group per syllable, optional key.
#[derive(Debug, Clone)]
pub struct Song {
    pub id: String,
    pub lines: Vec<Vec<String>>,
    pub notes: Vec<NoteGroup>,
    pub key: Option<Key>,
    /// Generating style for synthetic songs; evaluation only.
    pub style: Option<usize>,
}

impl Song {
    pub fn syllable_count(&self) -> usize {
        self.lines.iter().map(|l| l.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.syllable_count() != self.notes.len() {
            return Err(DmgError::Corpus(format!(
                "song {}: {} syllables vs {} note groups",
                self.id,
                self.syllable_count(),
                self.notes.len()
            )));
        }
        if self.notes.iter().any(|g| g.is_empty()) {
            return Err(DmgError::Corpus(format!("song {}: empty note group", self.id)));
        }
        Ok(())
    }
}

/// JSONL wire form of a song. Durations are strings like "1/2" or "2".
#[derive(Debug, Serialize, Deserialize)]
pub struct SongRecord {
    pub id: String,
    pub lines: Vec<Vec<String>>,
    pub notes: Vec<Vec<(u8, String)>>,
    #[serde(default)]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<usize>,
}

pub fn parse_dur(s: &str) -> Result<Dur> {
    let parse_int =
        |x: &str| x.parse::<i64>().map_err(|_| DmgError::Corpus(format!("bad duration {s:?}")));
    let r = match s.split_once('/') {
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d == 0 {
                return Err(DmgError::Corpus(format!("zero denominator in {s:?}")));
            }
            Ratio::new(parse_int(num)?, d)
        }
        None => Ratio::from_integer(parse_int(s)?),
    };
    if r <= Ratio::from_integer(0) {
        return Err(DmgError::Corpus(format!("non-positive duration {s:?}")));
    }
    Ok(r)
}

pub fn render_dur(d: Dur) -> String {
    if *d.denom() == 1 {
        d.numer().to_string()
    } else {
        format!("{}/{}", d.numer(), d.denom())
    }
}

impl SongRecord {
    pub fn into_song(self) -> Result<Song> {
        let key = self.key.as_deref().map(Key::parse).transpose()?;
        let notes = self
            .notes
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .map(|(p, d)| Ok((p, parse_dur(&d)?)))
                    .collect::<Result<NoteGroup>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let song = Song {
            id: self.id,
            lines: self.lines,
            notes,
            key,
            style: self.style,
        };
        song.validate()?;
        Ok(song)
    }

    pub fn from_song(song: &Song) -> SongRecord {
        SongRecord {
            id: song.id.clone(),
            lines: song.lines.clone(),
            notes: song
                .notes
                .iter()
                .map(|g| g.iter().map(|&(p, d)| (p, render_dur(d))).collect())
                .collect(),
            key: song.key.map(|k| k.render()),
            style: song.style,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_round_trip() {
        for s in ["C:maj", "A:min", "F#:maj", "Bb:min"] {
            let k = Key::parse(s).unwrap();
            let k2 = Key::parse(&k.render()).unwrap();
            assert_eq!(k, k2);
        }
    }

    #[test]
    fn dur_parse_render() {
        assert_eq!(render_dur(parse_dur("1/2").unwrap()), "1/2");
        assert_eq!(render_dur(parse_dur("2").unwrap()), "2");
        assert!(parse_dur("0").is_err());
        assert!(parse_dur("1/0").is_err());
    }

    #[test]
    fn validate_checks_alignment() {
        let song = Song {
            id: "s".into(),
            lines: vec![vec!["la".into(), "li".into()]],
            notes: vec![vec![(60, Ratio::from_integer(1))]],
            key: None,
            style: None,
        };
        assert!(song.validate().is_err());
    }
}
