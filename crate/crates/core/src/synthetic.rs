//! A small generated corpus with matching embeddings and WordNet data.
//!
//! Every topic holds the same two event types, one nominal (`quake`) and
//! one verbal (`arrest`). Each document mentions both events in every
//! sentence, heads are drawn from per-type synonym sets that share one
//! synset and point in one embedding direction, and different types are
//! orthogonal. Same-type mentions within a topic corefer.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{write_canonical_path, Corpus, Document, Mention, Sentence, SubTopic, Token};
use crate::error::{Error, Result};
use crate::featurize::FeatureConfig;
use crate::lexicon::{EmbeddingStore, WordNetStore};
use crate::seed;

struct EventType {
    name: &'static str,
    pos: &'static str,
    tag: &'static str,
    synonyms: &'static [&'static str],
    axis: usize,
}

const EVENT_TYPES: [EventType; 2] = [
    EventType {
        name: "quake",
        pos: "n",
        tag: "NN",
        synonyms: &["quake", "earthquake", "tremor"],
        axis: 0,
    },
    EventType {
        name: "arrest",
        pos: "v",
        tag: "VBD",
        synonyms: &["arrested", "detained", "apprehended"],
        axis: 1,
    },
];

/// Shape of the generated corpus.
#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub topics: u32,
    pub docs_per_topic: usize,
    pub sentences_per_doc: usize,
    pub embedding_dim: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            topics: 2,
            docs_per_topic: 3,
            sentences_per_doc: 3,
            embedding_dim: 8,
            seed: 1,
        }
    }
}

pub struct Fixture {
    pub corpus: Corpus,
    pub embeddings: EmbeddingStore,
    pub wordnet_tsv: String,
    pub feature_config: FeatureConfig,
}

impl Fixture {
    pub fn wordnet(&self) -> WordNetStore {
        WordNetStore::from_reader(self.wordnet_tsv.as_bytes()).expect("generated WordNet data is valid")
    }
}

fn token(index: usize, text: &str, pos: &str) -> Token {
    Token {
        index,
        text: text.to_string(),
        lemma: text.to_string(),
        pos: pos.to_string(),
    }
}

/// Lemma of a synonym as stored in the WordNet data (`arrested` -> `arrest`).
fn base_form(word: &str) -> &str {
    match word {
        "arrested" => "arrest",
        "detained" => "detain",
        "apprehended" => "apprehend",
        w => w,
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<Fixture> {
    if spec.embedding_dim < 3 {
        return Err(Error::Config("synthetic embeddings need at least 3 dimensions".into()));
    }
    let mut rng = seed::rng(spec.seed, "synthetic");
    let mut documents = Vec::new();
    for topic in 1..=spec.topics {
        for d in 1..=spec.docs_per_topic {
            let doc_id = format!("{topic}_{d}ecb");
            let mut sentences = Vec::new();
            let mut mentions = Vec::new();
            for s in 0..spec.sentences_per_doc {
                let mut order: Vec<usize> = (0..EVENT_TYPES.len()).collect();
                order.shuffle(&mut rng);
                let mut tokens = vec![token(0, "officials", "NNS"), token(1, "said", "VBD")];
                for &k in &order {
                    let ev = &EVENT_TYPES[k];
                    let word = *ev.synonyms.choose(&mut rng).unwrap();
                    let at = tokens.len();
                    tokens.push(Token {
                        lemma: base_form(word).to_string(),
                        ..token(at, word, ev.tag)
                    });
                    tokens.push(token(at + 1, "and", "CC"));
                    mentions.push(Mention {
                        id: format!("{doc_id}:{s}:{}", ev.name),
                        doc_id: doc_id.clone(),
                        sentence_index: s,
                        span: (at, at),
                        head_index: at,
                        wd_chain: Some(format!("{doc_id}/{}", ev.name)),
                        cd_chain: Some(format!("t{topic}/{}", ev.name)),
                    });
                }
                tokens.push(token(tokens.len(), "today", "NN"));
                sentences.push(Sentence { index: s, tokens });
            }
            documents.push(Document {
                doc_id,
                topic,
                sub_topic: SubTopic::Ecb,
                sentences,
                mentions,
            });
        }
    }
    let corpus = Corpus::new(documents)?;

    let dim = spec.embedding_dim;
    let mut embeddings = EmbeddingStore::new(dim);
    for ev in &EVENT_TYPES {
        for word in ev.synonyms {
            let mut v = vec![0.0f32; dim];
            v[ev.axis] = 1.0;
            v[2 + rng.gen_range(0..dim - 2)] = rng.gen_range(0.1..0.3);
            embeddings.insert(word, &v)?;
        }
    }

    let mut tsv = String::from("#SYNSETS\n");
    tsv.push_str("event.n.01\tn\tevent\n");
    tsv.push_str("act.v.01\tv\tact\n");
    for ev in &EVENT_TYPES {
        let lemmas: Vec<&str> = ev.synonyms.iter().map(|w| base_form(w)).collect();
        tsv.push_str(&format!("{}.{}.01\t{}\t{}\n", ev.name, ev.pos, ev.pos, lemmas.join(",")));
    }
    tsv.push_str("#HYPERNYMS\nquake.n.01\tevent.n.01\narrest.v.01\tact.v.01\n#DERIV\n");

    Ok(Fixture {
        corpus,
        embeddings,
        wordnet_tsv: tsv,
        feature_config: FeatureConfig {
            embedding_dim: dim,
            ..FeatureConfig::default()
        },
    })
}

/// Paths of a fixture written to disk.
#[derive(Clone, Debug)]
pub struct FixtureFiles {
    pub corpus: PathBuf,
    pub embeddings: PathBuf,
    pub wordnet: PathBuf,
}

pub fn write_fixture(fixture: &Fixture, dir: &Path) -> Result<FixtureFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = FixtureFiles {
        corpus: dir.join("corpus.jsonl"),
        embeddings: dir.join("embeddings.txt"),
        wordnet: dir.join("wordnet.tsv"),
    };
    write_canonical_path(&fixture.corpus, &files.corpus)?;
    let mut buf = Vec::new();
    fixture
        .embeddings
        .write_word2vec(&mut buf)
        .map_err(|e| Error::io(&files.embeddings, e))?;
    fs::write(&files.embeddings, buf).map_err(|e| Error::io(&files.embeddings, e))?;
    fs::write(&files.wordnet, &fixture.wordnet_tsv).map_err(|e| Error::io(&files.wordnet, e))?;
    Ok(files)
}
