//! Read-only lexical resources backing the similarity features: a word
//! embedding store and a WordNet-style synset graph.

mod embeddings;
mod wordnet;

pub use embeddings::{cosine_similarity, load_embeddings, EmbeddingStore};
pub use wordnet::{load_wordnet, Synset, WordNetStore, VERB};

/// A similarity in `[0, 1]`, or unknown when one side has no data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Similarity {
    Known(f64),
    Unknown,
}

impl Similarity {
    pub fn value(self) -> Option<f64> {
        match self {
            Similarity::Known(v) => Some(v),
            Similarity::Unknown => None,
        }
    }

    /// Larger of two similarities; unknown only if both are.
    pub fn max(self, other: Similarity) -> Similarity {
        match (self, other) {
            (Similarity::Known(a), Similarity::Known(b)) => Similarity::Known(a.max(b)),
            (Similarity::Known(a), Similarity::Unknown) | (Similarity::Unknown, Similarity::Known(a)) => {
                Similarity::Known(a)
            }
            (Similarity::Unknown, Similarity::Unknown) => Similarity::Unknown,
        }
    }
}
