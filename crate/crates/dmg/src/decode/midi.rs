//! Minimal standard MIDI file writer (format 0, single track).

use crate::decode::melody::Melody;
use crate::error::{DmgError, Result};
use num_rational::Ratio;

/// Ticks per quarter note.
pub const PPQ: u32 = 480;
/// Microseconds per quarter note at 120 BPM.
const TEMPO_USEC: u32 = 500_000;
const VELOCITY: u8 = 80;

fn push_varlen(out: &mut Vec<u8>, mut v: u32) {
    let mut buf = [0u8; 4];
    let mut n = 0;
    loop {
        buf[n] = (v & 0x7f) as u8;
        v >>= 7;
        n += 1;
        if v == 0 {
            break;
        }
    }
    for i in (0..n).rev() {
        let mut byte = buf[i];
        if i > 0 {
            byte |= 0x80;
        }
        out.push(byte);
    }
}

/// Duration of one beat (token "1") is a quarter note.
fn ticks_for(dur: Ratio<i64>) -> Result<u32> {
    let scaled = dur * Ratio::from_integer(PPQ as i64);
    if !scaled.is_integer() || *scaled.numer() < 0 {
        return Err(DmgError::invalid(format!(
            "duration {} does not map to a whole tick count at {} ppq",
            dur, PPQ
        )));
    }
    Ok(*scaled.numer() as u32)
}

/// Serialize a melody to SMF format 0: 120 BPM tempo event, program 0 on
/// channel 0, one note-on/note-off pair per event, back to back.
pub fn to_midi_bytes(melody: &Melody) -> Result<Vec<u8>> {
    if melody.events.is_empty() {
        return Err(DmgError::invalid("cannot export an empty melody"));
    }
    let mut track = Vec::new();
    // tempo meta event
    track.extend_from_slice(&[0x00, 0xff, 0x51, 0x03]);
    track.extend_from_slice(&TEMPO_USEC.to_be_bytes()[1..]);
    // program change, channel 0, program 0
    track.extend_from_slice(&[0x00, 0xc0, 0x00]);
    for ev in &melody.events {
        let ticks = ticks_for(ev.duration)?;
        push_varlen(&mut track, 0);
        track.extend_from_slice(&[0x90, ev.pitch, VELOCITY]);
        push_varlen(&mut track, ticks);
        track.extend_from_slice(&[0x80, ev.pitch, 0]);
    }
    // end of track
    track.extend_from_slice(&[0x00, 0xff, 0x2f, 0x00]);

    let mut out = Vec::with_capacity(track.len() + 22);
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes()); // format 0
    out.extend_from_slice(&1u16.to_be_bytes()); // one track
    out.extend_from_slice(&(PPQ as u16).to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::melody::MelodyEvent;

    fn melody(events: &[(u8, Ratio<i64>)]) -> Melody {
        Melody {
            events: events
                .iter()
                .map(|&(pitch, duration)| MelodyEvent {
                    pitch,
                    duration,
                    syllable: 0,
                })
                .collect(),
            arity_mismatches: 0,
        }
    }

    #[test]
    fn varlen_known_values() {
        // reference encodings from the SMF spec tables
        for (v, want) in [
            (0u32, vec![0x00u8]),
            (0x40, vec![0x40]),
            (0x7f, vec![0x7f]),
            (0x80, vec![0x81, 0x00]),
            (0x2000, vec![0xc0, 0x00]),
            (0x3fff, vec![0xff, 0x7f]),
            (0x4000, vec![0x81, 0x80, 0x00]),
            (0x0fffffff, vec![0xff, 0xff, 0xff, 0x7f]),
        ] {
            let mut out = Vec::new();
            push_varlen(&mut out, v);
            assert_eq!(out, want, "encoding of {v:#x}");
        }
    }

    #[test]
    fn ticks_quarter_and_fractions() {
        assert_eq!(ticks_for(Ratio::from_integer(1)).unwrap(), 480);
        assert_eq!(ticks_for(Ratio::new(1, 2)).unwrap(), 240);
        assert_eq!(ticks_for(Ratio::new(1, 3)).unwrap(), 160);
        assert_eq!(ticks_for(Ratio::from_integer(2)).unwrap(), 960);
        assert!(ticks_for(Ratio::new(1, 7)).is_err());
    }

    #[test]
    fn single_note_bytes() {
        // one C4 quarter note, checked against a hand-assembled file
        let bytes = to_midi_bytes(&melody(&[(60, Ratio::from_integer(1))])).unwrap();
        let expect: Vec<u8> = [
            b"MThd".as_slice(),
            &[0, 0, 0, 6, 0, 0, 0, 1, 0x01, 0xe0],
            b"MTrk",
            &[0, 0, 0, 23],
            &[0x00, 0xff, 0x51, 0x03, 0x07, 0xa1, 0x20],
            &[0x00, 0xc0, 0x00],
            &[0x00, 0x90, 60, VELOCITY],
            &[0x83, 0x60, 0x80, 60, 0], // delta 480 = 0x83 0x60
            &[0x00, 0xff, 0x2f, 0x00],
        ]
        .concat();
        assert_eq!(bytes, expect);
    }

    #[test]
    fn parses_with_independent_reader() {
        let m = melody(&[
            (60, Ratio::from_integer(1)),
            (64, Ratio::new(1, 2)),
            (67, Ratio::from_integer(2)),
        ]);
        let bytes = to_midi_bytes(&m).unwrap();
        let smf = midly::Smf::parse(&bytes).unwrap();
        assert!(matches!(smf.header.format, midly::Format::SingleTrack));
        match smf.header.timing {
            midly::Timing::Metrical(t) => assert_eq!(t.as_int(), 480),
            _ => panic!("expected metrical timing"),
        }
        assert_eq!(smf.tracks.len(), 1);
        let mut notes = Vec::new();
        let mut tempo = None;
        for ev in &smf.tracks[0] {
            match ev.kind {
                midly::TrackEventKind::Meta(midly::MetaMessage::Tempo(t)) => {
                    tempo = Some(t.as_int());
                }
                midly::TrackEventKind::Midi {
                    message: midly::MidiMessage::NoteOff { key, .. },
                    ..
                } => notes.push((key.as_int(), ev.delta.as_int())),
                _ => {}
            }
        }
        assert_eq!(tempo, Some(500_000));
        assert_eq!(notes, vec![(60, 480), (64, 240), (67, 960)]);
    }

    #[test]
    fn empty_melody_rejected() {
        assert!(to_midi_bytes(&Melody::default()).is_err());
    }
}
