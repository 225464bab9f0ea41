use serde::{Deserialize, Serialize};

use crate::frontend::{FrontendError, UnifiedAst};

/// Distribution of untruncated pre-order path lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub count: usize,
    pub mean: f64,
    pub median: usize,
    pub p70: usize,
    pub p80: usize,
    pub p90: usize,
    pub max: usize,
}

/// Nearest-rank percentile: the smallest value with at least `pct`% of the
/// data at or below it. `sorted` must be ascending and non-empty.
pub fn nearest_rank(sorted: &[usize], pct: f64) -> usize {
    let n = sorted.len();
    let rank = ((pct / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

impl LengthStats {
    pub fn from_lengths(lengths: &[usize]) -> Result<Self, FrontendError> {
        if lengths.is_empty() {
            return Err(FrontendError::EmptyCorpus);
        }
        let mut sorted = lengths.to_vec();
        sorted.sort_unstable();
        Ok(Self {
            count: sorted.len(),
            mean: sorted.iter().sum::<usize>() as f64 / sorted.len() as f64,
            median: nearest_rank(&sorted, 50.0),
            p70: nearest_rank(&sorted, 70.0),
            p80: nearest_rank(&sorted, 80.0),
            p90: nearest_rank(&sorted, 90.0),
            max: *sorted.last().expect("non-empty"),
        })
    }
}

pub fn path_length_stats<'a>(
    corpus: impl IntoIterator<Item = &'a UnifiedAst>,
) -> Result<LengthStats, FrontendError> {
    let lengths: Vec<usize> = corpus.into_iter().map(|a| a.root().node_count()).collect();
    LengthStats::from_lengths(&lengths)
}
