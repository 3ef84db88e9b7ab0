//! Event coreference resolution within and across documents.
//!
//! The pipeline featurizes pairs of event mentions, scores them with small
//! feedforward classifiers (one for within-document pairs, one for
//! cross-document pairs), clusters mentions by finding connected components
//! in the thresholded score graph and evaluates the result with MUC, B³,
//! CEAF_e and CoNLL F1.
//!
//! Module map:
//!
//! - [`corpus`]: ECB+ XML and canonical JSON-lines ingestion, topic splits,
//!   gold chains.
//! - [`lexicon`]: word embeddings and a WordNet-style store with path
//!   similarities.
//! - [`featurize`]: the fixed-layout pair feature vector.
//! - [`pairnet`]: pair generation, the ReLU classifiers, training.
//! - [`cluster`]: mention graphs, connected components, two-phase CD
//!   resolution, the lemma baseline.
//! - [`metrics`]: coreference and pairwise metrics.
//! - [`pipeline`]: config-driven stages used by the command line tool.

pub mod cluster;
pub mod corpus;
mod error;
pub mod featurize;
pub mod lexicon;
pub mod metrics;
pub mod pairnet;
pub mod pipeline;
pub mod seed;
pub mod synthetic;

pub use cluster::{Clustering, MentionGraph, Thresholds};
pub use corpus::{Corpus, Document, Mention, Scope, Sentence, SplitConfig, SubTopic, Token};
pub use error::{Error, Result};
pub use featurize::{FeatureConfig, Featurizer, PairFeatureVector};
pub use lexicon::{EmbeddingStore, Similarity, WordNetStore};
pub use metrics::{ConfusionCounts, Prf};
pub use pairnet::{Architecture, LabeledPair, PairModel, TrainConfig};
