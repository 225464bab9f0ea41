use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelConfig, ModelError};
use crate::frontend::PAD_INDEX;
use crate::tensor::{Tape, Tensor, Var};

/// Named trainable arrays in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
    index: BTreeMap<String, usize>,
}

/// Parameter handles recorded on one tape, in store order.
#[derive(Clone, Debug)]
pub struct BoundParams {
    vars: Vec<Var>,
    index: BTreeMap<String, usize>,
}

impl BoundParams {
    pub fn get(&self, name: &str) -> Var {
        self.vars[self.index[name]]
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

pub(crate) fn lstm_name(layer: usize, backward: bool, part: &str) -> String {
    format!("lstm.{layer}.{}.{part}", if backward { "bw" } else { "fw" })
}

impl ParamStore {
    pub fn empty() -> Self {
        Self {
            names: Vec::new(),
            tensors: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) {
        let name = name.into();
        assert!(
            !self.index.contains_key(&name),
            "duplicate parameter {name}"
        );
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.tensors.push(tensor);
    }

    /// Every parameter the configuration needs, randomly initialized.
    ///
    /// Weights are uniform in `±sqrt(1 / fan_in)` with `fan_in` the number of
    /// rows. Biases start at zero except the LSTM forget gate, which starts
    /// at one. The PAD rows of the embedding and first graph weight are zero.
    pub fn init(config: &ModelConfig, rng: &mut impl Rng) -> Result<Self, ModelError> {
        config.validate()?;
        let mut store = Self::empty();
        let mut uniform = |rows: usize, cols: usize| {
            let bound = (1.0 / rows as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| rng.random_range(-bound..=bound))
                .collect();
            Tensor::matrix(rows, cols, data).expect("length matches")
        };
        let (v, d, h) = (config.vocab_size, config.embed_dim, config.lstm_hidden);

        if config.mode.uses_sequence() {
            let mut table = uniform(v, d);
            table.data_mut()[PAD_INDEX * d..(PAD_INDEX + 1) * d].fill(0.0);
            store.insert("embedding", table);
            if config.learned_projections {
                for name in ["attn.wq", "attn.wk", "attn.wv"] {
                    store.insert(name, uniform(d, d));
                }
            }
            for layer in 0..config.lstm_layers {
                let input = if layer == 0 { d } else { 2 * h };
                for backward in [false, true] {
                    store.insert(lstm_name(layer, backward, "w_x"), uniform(input, 4 * h));
                    store.insert(lstm_name(layer, backward, "w_h"), uniform(h, 4 * h));
                    // gate order: input, forget, output, candidate
                    let mut bias = vec![0.0; 4 * h];
                    bias[h..2 * h].fill(1.0);
                    store.insert(lstm_name(layer, backward, "b"), Tensor::row(bias));
                }
            }
        }
        if config.mode.uses_graph() {
            for (l, (input, output)) in config.gcn_dims().into_iter().enumerate() {
                let mut w = uniform(input, output);
                if l == 0 {
                    w.data_mut()[PAD_INDEX * output..(PAD_INDEX + 1) * output].fill(0.0);
                }
                store.insert(format!("gcn.{l}.w"), w);
            }
        }
        store.insert(
            "classifier.w",
            uniform(config.feature_dim(), config.num_classes),
        );
        store.insert("classifier.b", Tensor::row(vec![0.0; config.num_classes]));
        Ok(store)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index.get(name).map(|&i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index.get(name).map(|&i| &mut self.tensors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    /// Total number of scalars.
    pub fn scalar_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::is_finite)
    }

    /// Records every parameter as a trainable leaf.
    pub fn bind(&self, tape: &mut Tape) -> BoundParams {
        BoundParams {
            vars: self.tensors.iter().map(|t| tape.leaf(t.clone())).collect(),
            index: self.index.clone(),
        }
    }

    /// Checks that this store has exactly the parameters `config` calls for.
    pub fn check_layout(&self, config: &ModelConfig) -> Result<(), ModelError> {
        let reference = Self::init(config, &mut ChaCha8Rng::seed_from_u64(0))?;
        if reference.names != self.names {
            return Err(ModelError::ParameterLayout(format!(
                "expected parameters {:?}, found {:?}",
                reference.names, self.names
            )));
        }
        for ((name, want), got) in reference.iter().zip(&self.tensors) {
            if want.shape() != got.shape() {
                return Err(ModelError::ParameterLayout(format!(
                    "{name}: expected shape {:?}, found {:?}",
                    want.shape(),
                    got.shape()
                )));
            }
        }
        Ok(())
    }
}
