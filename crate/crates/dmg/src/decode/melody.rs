use serde::{Deserialize, Serialize};

use crate::corpus::song::{parse_dur, render_dur, Dur};
use crate::error::{DmgError, Result};

/// One generated note, tied back to the source syllable it is sung on.
#[derive(Debug, Clone, PartialEq)]
pub struct MelodyEvent {
    pub pitch: u8,
    pub duration: Dur,
    pub syllable: usize,
}

/// Aligned generation output: every non-structural source position owns at
/// least one event.
#[derive(Debug, Clone, Default)]
pub struct Melody {
    pub events: Vec<MelodyEvent>,
    /// Positions where the pitch and duration networks disagreed on group
    /// arity and the shorter group was cycled.
    pub arity_mismatches: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct EventRecord {
    pitch: u8,
    duration: String,
    syllable: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct MelodyRecord {
    events: Vec<EventRecord>,
    arity_mismatches: usize,
}

impl Melody {
    pub fn to_json(&self) -> Result<String> {
        let rec = MelodyRecord {
            events: self
                .events
                .iter()
                .map(|e| EventRecord {
                    pitch: e.pitch,
                    duration: render_dur(e.duration),
                    syllable: e.syllable,
                })
                .collect(),
            arity_mismatches: self.arity_mismatches,
        };
        Ok(serde_json::to_string_pretty(&rec)?)
    }

    pub fn from_json(s: &str) -> Result<Melody> {
        let rec: MelodyRecord = serde_json::from_str(s)?;
        let events = rec
            .events
            .into_iter()
            .map(|e| {
                Ok(MelodyEvent {
                    pitch: e.pitch,
                    duration: parse_dur(&e.duration)?,
                    syllable: e.syllable,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Melody {
            events,
            arity_mismatches: rec.arity_mismatches,
        })
    }

    pub fn check(&self) -> Result<()> {
        for e in &self.events {
            if e.duration <= num_rational::Ratio::from_integer(0) {
                return Err(DmgError::invalid("non-positive duration in melody"));
            }
        }
        Ok(())
    }
}
