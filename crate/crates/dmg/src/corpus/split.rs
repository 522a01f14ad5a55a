use crate::corpus::song::Song;
use crate::corpus::tokens::{pair_lines, AlignedPair};
use crate::error::{DmgError, Result};
use crate::numcore::Rng;

/// 8:1:1 split of aligned pairs, disjoint by song id.
#[derive(Debug, Clone)]
pub struct CorpusSplit {
    pub train: Vec<AlignedPair>,
    pub valid: Vec<AlignedPair>,
    pub test: Vec<AlignedPair>,
}

/// Shuffle songs by seed and split 8:1:1 by song id, rounding toward train.
pub fn split_corpus(songs: &[Song], seed: u64) -> Result<CorpusSplit> {
    if songs.len() < 10 {
        return Err(DmgError::Corpus(format!(
            "need at least 10 songs to split, got {}",
            songs.len()
        )));
    }
    let mut order: Vec<usize> = (0..songs.len()).collect();
    let mut rng = Rng::new(seed);
    rng.shuffle(&mut order);

    let n = songs.len();
    let n_valid = n / 10;
    let n_test = n / 10;
    let n_train = n - n_valid - n_test;

    let mut split = CorpusSplit {
        train: Vec::new(),
        valid: Vec::new(),
        test: Vec::new(),
    };
    for (pos, &idx) in order.iter().enumerate() {
        let pairs = pair_lines(&songs[idx])?;
        let bucket = if pos < n_train {
            &mut split.train
        } else if pos < n_train + n_valid {
            &mut split.valid
        } else {
            &mut split.test
        };
        bucket.extend(pairs);
    }
    Ok(split)
}
