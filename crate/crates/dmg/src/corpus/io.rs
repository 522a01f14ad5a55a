use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::corpus::song::{Song, SongRecord};
use crate::corpus::syllabify::{apply_dict, PronDict};
use crate::error::{DmgError, Result};

/// Load a JSONL corpus, one song per line. When a pronunciation dictionary
/// is supplied, single characters in the lyric lines are syllabified.
pub fn load_songs_jsonl(path: &Path, dict: Option<&PronDict>) -> Result<Vec<Song>> {
    let file = std::fs::File::open(path)?;
    let mut songs = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SongRecord = serde_json::from_str(&line).map_err(|e| {
            DmgError::Corpus(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        let mut song = record.into_song()?;
        if let Some(d) = dict {
            for l in &mut song.lines {
                *l = apply_dict(l, d);
            }
        }
        songs.push(song);
    }
    Ok(songs)
}

pub fn save_songs_jsonl(path: &Path, songs: &[Song]) -> Result<()> {
    let mut out = Vec::new();
    for song in songs {
        serde_json::to_writer(&mut out, &SongRecord::from_song(song))?;
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

/// Write to a sibling temp file and rename, so failures never leave partial
/// output at the destination.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
