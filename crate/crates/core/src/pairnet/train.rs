use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Architecture, LabeledPair, PairModel};
use crate::corpus::Scope;
use crate::error::{Error, Result};
use crate::featurize::Featurizer;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativeSampling {
    /// As many sampled negatives as positives.
    Balanced,
    /// Every generated negative.
    Actual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Set by the caller; config files derive it from the root seed.
    #[serde(skip)]
    pub seed: u64,
    pub negative_sampling: NegativeSampling,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 20,
            batch_size: 32,
            seed: 0,
            negative_sampling: NegativeSampling::Balanced,
        }
    }
}

impl TrainConfig {
    pub fn for_scope(scope: Scope) -> Self {
        TrainConfig {
            negative_sampling: match scope {
                Scope::Wd => NegativeSampling::Balanced,
                Scope::Cd => NegativeSampling::Actual,
            },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Rows of labeled training vectors.
pub trait PairSource: Sync {
    fn len(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn write_row(&self, i: usize, out: &mut Vec<f64>) -> Result<()>;
    fn label(&self, i: usize) -> bool;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// In-memory feature matrix.
#[derive(Clone, Debug, Default)]
pub struct DenseSet {
    dim: usize,
    values: Vec<f64>,
    labels: Vec<bool>,
}

impl DenseSet {
    pub fn new(dim: usize) -> Self {
        DenseSet {
            dim,
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: &[f64], label: bool) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: row.len(),
            });
        }
        self.values.extend_from_slice(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

impl PairSource for DenseSet {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn write_row(&self, i: usize, out: &mut Vec<f64>) -> Result<()> {
        out.extend_from_slice(self.row(i));
        Ok(())
    }

    fn label(&self, i: usize) -> bool {
        self.labels[i]
    }
}

/// Labeled pairs featurized on demand.
pub struct FeaturizedPairs<'f, 'a> {
    pub featurizer: &'f Featurizer<'a>,
    pub pairs: &'f [LabeledPair],
    pub scope: Scope,
}

impl PairSource for FeaturizedPairs<'_, '_> {
    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn input_dim(&self) -> usize {
        self.featurizer.input_dim(self.scope)
    }

    fn write_row(&self, i: usize, out: &mut Vec<f64>) -> Result<()> {
        let p = &self.pairs[i];
        self.featurizer.extend_pair(&p.m1, &p.m2, self.scope, out)
    }

    fn label(&self, i: usize) -> bool {
        self.pairs[i].coref
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: PairModel,
    /// Mean loss per epoch.
    pub loss_trace: Vec<f64>,
}

/// Mini-batch SGD on the softmax cross-entropy. The row order is reshuffled
/// every epoch from the `shuffle` stream of the seed.
pub fn train(
    scope: Scope,
    architecture: Architecture,
    data: &dyn PairSource,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if data.input_dim() != architecture.input_dim {
        return Err(Error::Dimension {
            expected: architecture.input_dim,
            found: data.input_dim(),
        });
    }
    if data.is_empty() {
        return Err(Error::Config(format!("no {scope} training pairs")));
    }
    let positives = (0..data.len()).filter(|&i| data.label(i)).count();
    if positives == 0 || positives == data.len() {
        log::warn!("{scope} training data holds only one label ({positives} of {} positive)", data.len());
    }

    let mut model = PairModel::init(scope, architecture, config.seed);
    let mut rng = seed::rng(config.seed, "shuffle");
    let mut order: Vec<usize> = (0..data.len()).collect();
    let dim = data.input_dim();
    let mut buffer = Vec::with_capacity(config.batch_size * dim);
    let mut labels = Vec::with_capacity(config.batch_size);
    let mut loss_trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (batch, chunk) in order.chunks(config.batch_size).enumerate() {
            buffer.clear();
            labels.clear();
            for &i in chunk {
                data.write_row(i, &mut buffer)?;
                labels.push(data.label(i));
            }
            let x = Array2::from_shape_vec((chunk.len(), dim), std::mem::take(&mut buffer))
                .map_err(|e| Error::Model(e.to_string()))?;
            let (loss, grads) = model.backward(x.view(), &labels)?;
            buffer = x.into_raw_vec_and_offset().0;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch,
                    loss,
                });
            }
            total += loss;
            model.apply(&grads, config.learning_rate);
        }
        let mean = total / data.len() as f64;
        log::debug!("{scope} epoch {epoch}: mean loss {mean:.6}");
        loss_trace.push(mean);
        check_finite(&model)?;
    }
    Ok(TrainOutcome { model, loss_trace })
}

fn check_finite(model: &PairModel) -> Result<()> {
    for layer in &model.layers {
        if let Some(((row, col), _)) = layer.weights.indexed_iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::NonFiniteWeight { row, col });
        }
    }
    Ok(())
}

/// Fraction of rows whose predicted label at 0.5 matches the gold label.
pub fn accuracy(model: &PairModel, data: &dyn PairSource) -> Result<f64> {
    let mut row = Vec::with_capacity(data.input_dim());
    let mut correct = 0;
    for i in 0..data.len() {
        row.clear();
        data.write_row(i, &mut row)?;
        if (model.predict(&row)? >= 0.5) == data.label(i) {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len().max(1) as f64)
}
