//! Feedforward pairwise coreference classifiers.
//!
//! A [`PairModel`] is a stack of ReLU layers followed by a two-way softmax
//! `(p_noncoref, p_coref)`, trained with mini-batch SGD on the softmax
//! cross-entropy. WD and CD models are separate instances.

mod pairs;
mod train;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::distributions::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::corpus::Scope;
use crate::error::{Error, Result};
use crate::seed;

pub use pairs::{generate_pairs, sample_balanced, LabeledPair, PairMode};
pub use train::{
    accuracy, train, DenseSet, FeaturizedPairs, NegativeSampling, PairSource, TrainConfig, TrainOutcome,
};

/// Lower clamp on the probability inside the loss.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden_sizes: Vec<usize>,
}

impl Architecture {
    pub fn new(input_dim: usize, hidden_sizes: Vec<usize>) -> Result<Self> {
        if input_dim == 0 || hidden_sizes.contains(&0) {
            return Err(Error::Config("layer sizes must be at least 1".into()));
        }
        Ok(Architecture {
            input_dim,
            hidden_sizes,
        })
    }

    pub fn default_hidden(scope: Scope) -> Vec<usize> {
        match scope {
            Scope::Wd => vec![300],
            Scope::Cd => vec![400, 150],
        }
    }

    /// `(fan_in, fan_out)` of every layer, output layer last.
    fn shapes(&self) -> Vec<(usize, usize)> {
        let mut sizes = vec![self.input_dim];
        sizes.extend(&self.hidden_sizes);
        sizes.push(2);
        sizes.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// One affine layer, `z = W x + b` with `W` of shape `(out, in)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairModel {
    pub scope: Scope,
    pub architecture: Architecture,
    pub seed: u64,
    pub layers: Vec<Dense>,
}

/// Parameter gradients, shaped like the model's layers.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

fn relu_in_place(z: &mut Array2<f64>) {
    z.mapv_inplace(|v| v.max(0.0));
}

/// Row-wise softmax over two logits with max subtraction.
fn softmax2(logits: ArrayView1<f64>) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

/// `-ln(max(p, 1e-12))`.
pub fn loss(probs: [f64; 2], coref: bool) -> f64 {
    let p = if coref { probs[1] } else { probs[0] };
    if p.is_nan() {
        return f64::NAN;
    }
    -p.max(PROB_FLOOR).ln()
}

impl PairModel {
    /// Glorot-uniform weights and zero biases drawn from the `init` stream
    /// of `seed`.
    pub fn init(scope: Scope, architecture: Architecture, seed: u64) -> Self {
        let mut rng = seed::rng(seed, "init");
        let layers = architecture
            .shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit);
                Dense {
                    weights: Array2::from_shape_simple_fn((fan_out, fan_in), || dist.sample(&mut rng)),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        PairModel {
            scope,
            architecture,
            seed,
            layers,
        }
    }

    pub fn zeros(scope: Scope, architecture: Architecture) -> Self {
        let layers = architecture
            .shapes()
            .into_iter()
            .map(|(i, o)| Dense {
                weights: Array2::zeros((o, i)),
                bias: Array1::zeros(o),
            })
            .collect();
        PairModel {
            scope,
            architecture,
            seed: 0,
            layers,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.architecture.input_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found,
            });
        }
        Ok(())
    }

    /// Activations of every layer for a batch; the last entry holds the
    /// output logits.
    fn activations(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len());
        let mut current = x.to_owned();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = current.dot(&layer.weights.t()) + &layer.bias;
            if k + 1 < self.layers.len() {
                relu_in_place(&mut z);
            }
            acts.push(z.clone());
            current = z;
        }
        acts
    }

    /// `(p_noncoref, p_coref)` for each row of a batch.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Vec<[f64; 2]>> {
        self.check_dim(x.ncols())?;
        let acts = self.activations(x);
        let logits = acts.last().unwrap();
        Ok(logits.rows().into_iter().map(softmax2).collect())
    }

    pub fn forward(&self, x: &[f64]) -> Result<[f64; 2]> {
        self.check_dim(x.len())?;
        let view = ArrayView2::from_shape((1, x.len()), x).expect("contiguous row");
        Ok(self.forward_batch(view)?[0])
    }

    /// Probability of coreference.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?[1])
    }

    /// Summed loss and gradients of the mean loss over the batch.
    pub fn backward(&self, x: ArrayView2<f64>, labels: &[bool]) -> Result<(f64, Gradients)> {
        self.check_dim(x.ncols())?;
        let batch = x.nrows();
        let acts = self.activations(x);
        let logits = acts.last().unwrap();

        let mut total = 0.0;
        let mut delta = Array2::<f64>::zeros((batch, 2));
        for (r, row) in logits.rows().into_iter().enumerate() {
            let p = softmax2(row);
            total += loss(p, labels[r]);
            let target = if labels[r] { [0.0, 1.0] } else { [1.0, 0.0] };
            delta[[r, 0]] = (p[0] - target[0]) / batch as f64;
            delta[[r, 1]] = (p[1] - target[1]) / batch as f64;
        }

        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        for k in (0..self.layers.len()).rev() {
            let input = if k == 0 { x } else { acts[k - 1].view() };
            grads.push(Dense {
                weights: delta.t().dot(&input),
                bias: delta.sum_axis(Axis(0)),
            });
            if k > 0 {
                let mut back = delta.dot(&self.layers[k].weights);
                back.zip_mut_with(&acts[k - 1], |g, &a| {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                });
                delta = back;
            }
        }
        grads.reverse();
        Ok((total, Gradients { layers: grads }))
    }

    fn apply(&mut self, grads: &Gradients, learning_rate: f64) {
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            layer.weights.scaled_add(-learning_rate, &g.weights);
            layer.bias.scaled_add(-learning_rate, &g.bias);
        }
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, &ModelFile::from(self)).map_err(|e| Error::Model(e.to_string()))?;
        w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    /// Loads a model, failing if its input width differs from
    /// `expected_input_dim` when one is given.
    pub fn load(path: &Path, expected_input_dim: Option<usize>) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let raw: ModelFile =
            serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Model(format!("{}: {e}", path.display())))?;
        let model = PairModel::try_from(raw)?;
        if let Some(dim) = expected_input_dim {
            model.check_dim(dim)?;
        }
        Ok(model)
    }
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }
}

/// Largest relative error `|a - n| / max(|a| + |n|, 1e-8)` between the
/// analytic gradient and central finite differences over every parameter.
pub fn gradient_check(model: &PairModel, x: &[f64], coref: bool, epsilon: f64) -> Result<f64> {
    model.check_dim(x.len())?;
    let view = ArrayView2::from_shape((1, x.len()), x).expect("contiguous row");
    let analytic = model.backward(view, &[coref])?.1.flat();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let original = *probe.params_mut().nth(i).unwrap();
        *probe.params_mut().nth(i).unwrap() = original + epsilon;
        let up = loss(probe.forward(x)?, coref);
        *probe.params_mut().nth(i).unwrap() = original - epsilon;
        let down = loss(probe.forward(x)?, coref);
        *probe.params_mut().nth(i).unwrap() = original;
        let numeric = (up - down) / (2.0 * epsilon);
        let err = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    Ok(worst)
}

const MODEL_FORMAT: &str = "evcoref-pair-model/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    rows: usize,
    cols: usize,
    /// Row-major `(rows, cols)`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    scope: Scope,
    architecture: Architecture,
    seed: u64,
    layers: Vec<LayerFile>,
}

impl From<&PairModel> for ModelFile {
    fn from(m: &PairModel) -> Self {
        ModelFile {
            format: MODEL_FORMAT.into(),
            scope: m.scope,
            architecture: m.architecture.clone(),
            seed: m.seed,
            layers: m
                .layers
                .iter()
                .map(|l| LayerFile {
                    rows: l.weights.nrows(),
                    cols: l.weights.ncols(),
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelFile> for PairModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unsupported model format `{}`", f.format)));
        }
        let shapes = f.architecture.shapes();
        if shapes.len() != f.layers.len() {
            return Err(Error::Model(format!(
                "architecture has {} layers, file holds {}",
                shapes.len(),
                f.layers.len()
            )));
        }
        let mut layers = Vec::with_capacity(shapes.len());
        for (k, ((fan_in, fan_out), l)) in shapes.into_iter().zip(f.layers).enumerate() {
            if (l.rows, l.cols) != (fan_out, fan_in) || l.bias.len() != fan_out {
                return Err(Error::Model(format!("layer {k} does not match the architecture")));
            }
            let weights = Array2::from_shape_vec((l.rows, l.cols), l.weights)
                .map_err(|e| Error::Model(format!("layer {k}: {e}")))?;
            layers.push(Dense {
                weights,
                bias: Array1::from(l.bias),
            });
        }
        Ok(PairModel {
            scope: f.scope,
            architecture: f.architecture,
            seed: f.seed,
            layers,
        })
    }
}
