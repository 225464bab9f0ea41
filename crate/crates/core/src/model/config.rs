use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Which encoders feed the classifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Sequence and graph encoders, concatenated.
    #[default]
    Uast,
    /// Pre-order path encoder only.
    Sast,
    /// Graph encoder only.
    Gast,
}

impl Mode {
    pub fn uses_sequence(self) -> bool {
        matches!(self, Mode::Uast | Mode::Sast)
    }

    pub fn uses_graph(self) -> bool {
        matches!(self, Mode::Uast | Mode::Gast)
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Uast => "uast",
            Mode::Sast => "sast",
            Mode::Gast => "gast",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uast" => Ok(Mode::Uast),
            "sast" => Ok(Mode::Sast),
            "gast" => Ok(Mode::Gast),
            other => Err(format!(
                "unknown mode '{other}' (expected uast, sast or gast)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Sigmoid,
    Tanh,
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(format!("unknown activation '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Mean,
    Sum,
}

impl FromStr for Pooling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(Pooling::Mean),
            "sum" => Ok(Pooling::Sum),
            other => Err(format!("unknown pooling '{other}'")),
        }
    }
}

/// Network shape and regularization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub path_length: usize,
    pub embed_dim: usize,
    pub heads: usize,
    pub attn_dropout: f64,
    /// Q, K and V are the embedded path itself unless this is set.
    pub learned_projections: bool,
    pub lstm_hidden: usize,
    pub lstm_layers: usize,
    pub lstm_dropout: f64,
    pub graph_size: usize,
    pub gcn_layers: usize,
    pub gcn_hidden: usize,
    pub gcn_out: usize,
    pub gcn_activation: Activation,
    pub pooling: Pooling,
    pub num_classes: usize,
    pub vocab_size: usize,
    pub mode: Mode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            path_length: 700,
            embed_dim: 200,
            heads: 4,
            attn_dropout: 0.2,
            learned_projections: false,
            lstm_hidden: 64,
            lstm_layers: 2,
            lstm_dropout: 0.5,
            graph_size: 400,
            gcn_layers: 2,
            gcn_hidden: 200,
            gcn_out: 64,
            gcn_activation: Activation::Relu,
            pooling: Pooling::Mean,
            num_classes: 2,
            vocab_size: 2,
            mode: Mode::Uast,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: String| Err(ModelError::InvalidConfig(reason));
        let dims = [
            ("path_length", self.path_length),
            ("embed_dim", self.embed_dim),
            ("heads", self.heads),
            ("lstm_hidden", self.lstm_hidden),
            ("lstm_layers", self.lstm_layers),
            ("graph_size", self.graph_size),
            ("gcn_layers", self.gcn_layers),
            ("gcn_hidden", self.gcn_hidden),
            ("gcn_out", self.gcn_out),
            ("num_classes", self.num_classes),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return bad(format!("{name} must be at least 1"));
        }
        if self.vocab_size < 2 {
            return bad(format!(
                "vocab_size {} leaves no room beyond PAD",
                self.vocab_size
            ));
        }
        if !self.embed_dim.is_multiple_of(self.heads) {
            return bad(format!(
                "embed_dim {} not divisible by {} heads",
                self.embed_dim, self.heads
            ));
        }
        for (name, rate) in [
            ("attn_dropout", self.attn_dropout),
            ("lstm_dropout", self.lstm_dropout),
        ] {
            if !(0.0..1.0).contains(&rate) {
                return bad(format!("{name} {rate} outside [0, 1)"));
            }
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.embed_dim / self.heads
    }

    /// Width of the fused code vector fed to the classifier.
    pub fn feature_dim(&self) -> usize {
        let seq = if self.mode.uses_sequence() {
            2 * self.lstm_hidden
        } else {
            0
        };
        let graph = if self.mode.uses_graph() {
            self.gcn_out
        } else {
            0
        };
        seq + graph
    }

    /// Input and output widths of each graph convolution.
    pub fn gcn_dims(&self) -> Vec<(usize, usize)> {
        (0..self.gcn_layers)
            .map(|l| {
                let input = if l == 0 {
                    self.vocab_size
                } else {
                    self.gcn_hidden
                };
                let output = if l + 1 == self.gcn_layers {
                    self.gcn_out
                } else {
                    self.gcn_hidden
                };
                (input, output)
            })
            .collect()
    }
}
