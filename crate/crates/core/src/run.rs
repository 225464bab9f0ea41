//! Everything that determines a training run, in one serializable value.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::SplitRatios;
use crate::model::ModelConfig;
use crate::train::TrainConfig;

/// Preset hyperparameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Long paths for the larger two-language corpus.
    #[default]
    Jc,
    /// Shorter paths for the five-language problem corpus.
    Leetcode,
    /// Small widths for the bundled corpora; trains in seconds.
    Toy,
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jc" => Ok(Profile::Jc),
            "leetcode" => Ok(Profile::Leetcode),
            "toy" => Ok(Profile::Toy),
            other => Err(format!(
                "unknown profile '{other}' (expected jc, leetcode or toy)"
            )),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Jc => "jc",
            Profile::Leetcode => "leetcode",
            Profile::Toy => "toy",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub profile: Profile,
    /// Directory laid out as `<label>/<language>/<file>`.
    pub corpus: Option<PathBuf>,
    /// CSV of `path,label,language`; takes precedence over the directory scan.
    pub manifest: Option<PathBuf>,
    /// Unification table; the built-in table when absent.
    pub table: Option<PathBuf>,
    /// When false, trees keep their grammar's own kind names.
    pub unified_vocab: bool,
    /// Function names replaced by `XXX` before parsing.
    pub mask_names: Vec<String>,
    pub seed: u64,
    pub split: SplitRatios,
    /// `num_classes` and `vocab_size` are filled in from the data.
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::for_profile(Profile::Jc)
    }
}

impl RunConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let mut model = ModelConfig::default();
        let mut train = TrainConfig::default();
        match profile {
            Profile::Jc => model.path_length = 700,
            Profile::Leetcode => model.path_length = 200,
            Profile::Toy => {
                model.path_length = 160;
                model.graph_size = 160;
                model.embed_dim = 32;
                model.heads = 4;
                model.lstm_hidden = 16;
                model.gcn_hidden = 32;
                model.gcn_out = 16;
                model.learned_projections = true;
                train.batch_size = 8;
                train.epochs = 50;
                train.adam.lr = 0.005;
            }
        }
        Self {
            profile,
            corpus: None,
            manifest: None,
            table: None,
            unified_vocab: true,
            mask_names: Vec::new(),
            seed: 42,
            split: SplitRatios::default(),
            model,
            train,
            out_dir: PathBuf::from("runs/latest"),
        }
    }

    /// Reads a JSON config; absent fields take the defaults of the profile
    /// named in the file (or the default profile).
    pub fn from_json(text: &str) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let profile = match value.get("profile") {
            Some(p) => serde_json::from_value(p.clone()).map_err(|e| e.to_string())?,
            None => Profile::default(),
        };
        let mut base = serde_json::to_value(Self::for_profile(profile)).expect("config serializes");
        merge(&mut base, value);
        serde_json::from_value(base).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<(), String> {
        if self.corpus.is_none() && self.manifest.is_none() {
            return Err("no corpus directory or manifest given".into());
        }
        if self.split.0.iter().sum::<usize>() == 0 {
            return Err("split ratios sum to zero".into());
        }
        if self.train.batch_size == 0 {
            return Err("batch size must be at least 1".into());
        }
        if !(self.train.adam.lr >= 0.0 && self.train.adam.lr.is_finite()) {
            return Err(format!(
                "learning rate {} is not a finite non-negative number",
                self.train.adam.lr
            ));
        }
        let probe = ModelConfig {
            num_classes: self.model.num_classes.max(1),
            vocab_size: self.model.vocab_size.max(2),
            ..self.model.clone()
        };
        probe.validate().map_err(|e| e.to_string())
    }
}

/// Overlays `patch` onto `base`, recursing into objects.
fn merge(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_set_path_length() {
        assert_eq!(RunConfig::for_profile(Profile::Jc).model.path_length, 700);
        assert_eq!(
            RunConfig::for_profile(Profile::Leetcode).model.path_length,
            200
        );
        let toy = RunConfig::for_profile(Profile::Toy);
        assert_eq!(toy.model.embed_dim % toy.model.heads, 0);
    }

    #[test]
    fn json_overlays_profile_defaults() {
        let c = RunConfig::from_json(r#"{"profile": "leetcode", "seed": 7, "model": {"mode": "sast"}, "train": {"epochs": 2}}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.model.path_length, 200);
        assert_eq!(c.model.mode, crate::model::Mode::Sast);
        assert_eq!(c.train.epochs, 2);
        assert_eq!(c.train.batch_size, 64);
        assert!(RunConfig::from_json(r#"{"model": {"heads": "many"}}"#).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::for_profile(Profile::Toy);
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::for_profile(Profile::Toy);
        assert!(c.validate().is_err());
        c.corpus = Some("x".into());
        c.validate().unwrap();
        c.model.heads = 3;
        assert!(c.validate().is_err());
    }
}
