//! In-memory corpus model: documents, sentences, tokens and gold event
//! mentions with their within-document (WD) and cross-document (CD) chain
//! labels.
//!
//! A [`Corpus`] is validated on construction and immutable afterwards.

mod canonical;
mod ecb;
mod split;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::Clustering;
use crate::error::{Error, Result};

pub use canonical::{load_canonical, load_canonical_path, write_canonical, write_canonical_path};
pub use ecb::{load_ecb_dir, parse_ecb_document, EcbParse};
pub use split::{
    filter_to_gold, load_detected_spans, split_corpus, CorpusSplits, DetectedSpan, SplitConfig,
    TopicSet,
};

/// Coreference scope: within a document or across documents of a topic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Wd,
    Cd,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Wd => "wd",
            Scope::Cd => "cd",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wd" => Ok(Scope::Wd),
            "cd" => Ok(Scope::Cd),
            other => Err(Error::Config(format!("unknown scope `{other}`"))),
        }
    }
}

/// ECB+ splits every topic into two groups of documents about two distinct
/// seminal events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubTopic {
    #[serde(rename = "ecb")]
    Ecb,
    #[serde(rename = "ecbplus")]
    EcbPlus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub text: String,
    pub lemma: String,
    pub pos: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub tokens: Vec<Token>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mention {
    pub id: String,
    pub doc_id: String,
    pub sentence_index: usize,
    /// Inclusive token range within the sentence.
    pub span: (usize, usize),
    pub head_index: usize,
    pub wd_chain: Option<String>,
    pub cd_chain: Option<String>,
}

impl Mention {
    pub fn head<'a>(&self, doc: &'a Document) -> &'a Token {
        &doc.sentences[self.sentence_index].tokens[self.head_index]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub topic: u32,
    pub sub_topic: SubTopic,
    pub sentences: Vec<Sentence>,
    pub mentions: Vec<Mention>,
}

impl Document {
    fn invalid(&self, field: &'static str, message: impl Into<String>) -> Error {
        Error::Validation {
            doc_id: self.doc_id.clone(),
            field,
            message: message.into(),
        }
    }

    /// Checks the per-document invariants.
    pub fn validate(&self) -> Result<()> {
        for (i, sentence) in self.sentences.iter().enumerate() {
            if sentence.index != i {
                return Err(self.invalid(
                    "sentences",
                    format!("sentence at position {i} has index {}", sentence.index),
                ));
            }
            for (j, token) in sentence.tokens.iter().enumerate() {
                if token.index != j {
                    return Err(self.invalid(
                        "sentences",
                        format!("sentence {i}: token at position {j} has index {}", token.index),
                    ));
                }
                if token.text.is_empty() {
                    return Err(self.invalid("sentences", format!("sentence {i}: token {j} is empty")));
                }
            }
        }

        let mut cd_to_wd: HashMap<&str, Option<&str>> = HashMap::new();
        for m in &self.mentions {
            if m.doc_id != self.doc_id {
                return Err(self.invalid("mentions", format!("mention {} has doc_id {}", m.id, m.doc_id)));
            }
            let Some(sentence) = self.sentences.get(m.sentence_index) else {
                return Err(self.invalid(
                    "mentions",
                    format!("mention {}: sentence {} does not exist", m.id, m.sentence_index),
                ));
            };
            let (start, end) = m.span;
            if start > end || end >= sentence.tokens.len() {
                return Err(self.invalid(
                    "span",
                    format!("mention {}: span [{start}, {end}] invalid for sentence of {} tokens", m.id, sentence.tokens.len()),
                ));
            }
            if m.head_index < start || m.head_index > end {
                return Err(self.invalid(
                    "head",
                    format!("mention {}: head {} outside span [{start}, {end}]", m.id, m.head_index),
                ));
            }
            if let Some(cd) = m.cd_chain.as_deref() {
                let wd = m.wd_chain.as_deref();
                match cd_to_wd.get(cd) {
                    Some(seen) if *seen != wd => {
                        return Err(self.invalid(
                            "wd_chain",
                            format!("mentions of cd_chain {cd} carry different wd_chain labels"),
                        ));
                    }
                    _ => {
                        cd_to_wd.insert(cd, wd);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Table-1 style corpus statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub sentences: usize,
    pub mentions: usize,
    pub cd_chains: usize,
    pub wd_chains: usize,
    pub avg_wd_chain_length: f64,
    pub avg_cd_chain_length: f64,
}

/// A validated, immutable collection of documents.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    index: HashMap<String, (usize, usize)>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.documents == other.documents
    }
}

impl Corpus {
    /// Validates every corpus invariant; fails atomically.
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut doc_ids = HashSet::new();
        let mut index = HashMap::new();
        let mut wd_owner: HashMap<&str, &str> = HashMap::new();
        let mut cd_topic: HashMap<&str, u32> = HashMap::new();
        let mut cd_docs: HashMap<&str, HashSet<&str>> = HashMap::new();

        for (d, doc) in documents.iter().enumerate() {
            if !doc_ids.insert(doc.doc_id.as_str()) {
                return Err(Error::DuplicateDoc(doc.doc_id.clone()));
            }
            doc.validate()?;
            for (k, m) in doc.mentions.iter().enumerate() {
                if index.insert(m.id.clone(), (d, k)).is_some() {
                    return Err(doc.invalid("mentions", format!("duplicate mention id {}", m.id)));
                }
                if let Some(wd) = m.wd_chain.as_deref() {
                    match wd_owner.get(wd) {
                        Some(owner) if *owner != doc.doc_id => {
                            return Err(doc.invalid(
                                "wd_chain",
                                format!("wd_chain {wd} also used in document {owner}"),
                            ));
                        }
                        _ => {
                            wd_owner.insert(wd, &doc.doc_id);
                        }
                    }
                }
                if let Some(cd) = m.cd_chain.as_deref() {
                    match cd_topic.get(cd) {
                        Some(topic) if *topic != doc.topic => {
                            return Err(doc.invalid(
                                "cd_chain",
                                format!("cd_chain {cd} crosses topics {topic} and {}", doc.topic),
                            ));
                        }
                        _ => {
                            cd_topic.insert(cd, doc.topic);
                        }
                    }
                    cd_docs.entry(cd).or_default().insert(&doc.doc_id);
                }
            }
        }

        for doc in &documents {
            for m in &doc.mentions {
                if let Some(cd) = m.cd_chain.as_deref() {
                    if m.wd_chain.is_none() && cd_docs[cd].len() > 1 {
                        return Err(doc.invalid(
                            "wd_chain",
                            format!("mention {} is in cross-document chain {cd} without a wd_chain", m.id),
                        ));
                    }
                }
            }
        }

        Ok(Corpus { documents, index })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    /// All mentions in corpus order, paired with their document.
    pub fn mentions(&self) -> impl Iterator<Item = (&Document, &Mention)> {
        self.documents
            .iter()
            .flat_map(|d| d.mentions.iter().map(move |m| (d, m)))
    }

    pub fn mention(&self, id: &str) -> Option<(&Document, &Mention)> {
        self.index
            .get(id)
            .map(|&(d, k)| (&self.documents[d], &self.documents[d].mentions[k]))
    }

    /// Position of a mention in corpus order (document order, then mention
    /// order within the document).
    pub fn ordinal(&self, id: &str) -> Option<(usize, usize)> {
        self.index.get(id).copied()
    }

    pub fn mention_count(&self) -> usize {
        self.documents.iter().map(|d| d.mentions.len()).sum()
    }

    pub fn sentence_count(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }

    pub fn stats(&self) -> CorpusStats {
        let mentions = self.mention_count();
        let wd = gold_chains(self, Scope::Wd);
        let cd = gold_chains(self, Scope::Cd);
        let avg = |clusters: &Clustering| {
            if clusters.len() == 0 {
                0.0
            } else {
                clusters.mention_count() as f64 / clusters.len() as f64
            }
        };
        CorpusStats {
            documents: self.documents.len(),
            sentences: self.sentence_count(),
            mentions,
            cd_chains: cd.len(),
            wd_chains: wd.len(),
            avg_wd_chain_length: avg(&wd),
            avg_cd_chain_length: avg(&cd),
        }
    }
}

/// Gold chains for a scope. Mentions without a chain label are singletons,
/// so the result always partitions the mention set.
pub fn gold_chains(corpus: &Corpus, scope: Scope) -> Clustering {
    let mut groups: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    let mut singletons = Vec::new();
    for (doc, m) in corpus.mentions() {
        let key = match scope {
            Scope::Wd => m.wd_chain.as_ref().map(|c| (doc.doc_id.clone(), c.clone())),
            Scope::Cd => m.cd_chain.as_ref().map(|c| (String::new(), c.clone())),
        };
        match key {
            Some(key) => groups.entry(key).or_default().push(m.id.clone()),
            None => singletons.push(vec![m.id.clone()]),
        }
    }
    Clustering::new(groups.into_values().chain(singletons))
}
