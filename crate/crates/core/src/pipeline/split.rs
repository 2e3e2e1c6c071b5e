use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Disjoint train / validation / test track lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

/// Seeded 7:1:2 split by track count; rounding favours the train set.
pub fn split_dataset(ids: &[String], seed: u64) -> Result<SplitSpec> {
    split_with_fractions(ids, seed, 0.1, 0.2)
}

/// Seeded split with explicit validation and test fractions (each rounded
/// down). The result depends only on the seed and the set of ids.
pub fn split_with_fractions(ids: &[String], seed: u64, val: f64, test: f64) -> Result<SplitSpec> {
    if ids.len() < 10 {
        return Err(Error::invalid(format!("need at least 10 tracks to split, got {}", ids.len())));
    }
    if !(val >= 0.0 && test >= 0.0 && val + test < 1.0) {
        return Err(Error::invalid("split fractions must be non-negative and sum below 1"));
    }
    let mut sorted = ids.to_vec();
    sorted.sort();
    let before = sorted.len();
    sorted.dedup();
    if sorted.len() != before {
        return Err(Error::invalid("track ids must be unique"));
    }
    sorted.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = sorted.len();
    let n_val = (n as f64 * val).floor() as usize;
    let n_test = (n as f64 * test).floor() as usize;
    let test_ids = sorted.split_off(n - n_test);
    let val_ids = sorted.split_off(n - n_test - n_val);
    Ok(SplitSpec { train: sorted, val: val_ids, test: test_ids })
}
