use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "validation" | "val" | "valid" | "dev" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(format!(
                "unknown split '{other}' (expected train, validation or test)"
            )),
        }
    }
}

/// Relative sizes of train, validation and test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRatios(pub [usize; 3]);

impl Default for SplitRatios {
    fn default() -> Self {
        Self([3, 1, 1])
    }
}

/// Sizes for `n` items by largest remainder; ties go to the earlier split.
pub fn split_counts(n: usize, ratios: SplitRatios) -> [usize; 3] {
    let total: usize = ratios.0.iter().sum();
    assert!(total > 0, "split ratios must not all be zero");
    let mut counts = [0; 3];
    let mut remainders = [(0usize, 0usize); 3];
    for (i, &r) in ratios.0.iter().enumerate() {
        counts[i] = n * r / total;
        remainders[i] = (n * r % total, i);
    }
    let left = n - counts.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(left) {
        counts[i] += 1;
    }
    counts
}

/// Assigns every item a split. Items are grouped by `stratum`; each group is
/// shuffled with one seeded generator (groups visited in key order) and cut
/// by [`split_counts`].
pub fn split_dataset<K: Ord + Clone>(strata: &[K], ratios: SplitRatios, seed: u64) -> Vec<Split> {
    let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (i, k) in strata.iter().enumerate() {
        groups.entry(k.clone()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Split::Train; strata.len()];
    for members in groups.values_mut() {
        members.shuffle(&mut rng);
        let [train, val, _] = split_counts(members.len(), ratios);
        for (pos, &i) in members.iter().enumerate() {
            out[i] = if pos < train {
                Split::Train
            } else if pos < train + val {
                Split::Validation
            } else {
                Split::Test
            };
        }
    }
    out
}
