//! Canonical JSON-lines corpus format, one document per line.
//!
//! ```text
//! {"doc_id": str, "topic": int, "sub_topic": "ecb"|"ecbplus",
//!  "sentences": [[{"text", "lemma", "pos"}, ...], ...],
//!  "mentions": [{"id", "sentence", "span": [s, e], "head", "wd_chain", "cd_chain"}, ...]}
//! ```
//!
//! Keys are written in exactly this order with no whitespace, so writing a
//! loaded normalized file reproduces it byte for byte.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, Document, Mention, Sentence, SubTopic, Token};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalToken {
    text: String,
    lemma: String,
    pos: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalMention {
    id: String,
    sentence: usize,
    span: [usize; 2],
    head: usize,
    wd_chain: Option<String>,
    cd_chain: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalDocument {
    doc_id: String,
    topic: u32,
    sub_topic: SubTopic,
    sentences: Vec<Vec<CanonicalToken>>,
    mentions: Vec<CanonicalMention>,
}

impl From<CanonicalDocument> for Document {
    fn from(c: CanonicalDocument) -> Self {
        let sentences = c
            .sentences
            .into_iter()
            .enumerate()
            .map(|(index, tokens)| Sentence {
                index,
                tokens: tokens
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| Token {
                        index: i,
                        text: t.text,
                        lemma: t.lemma,
                        pos: t.pos,
                    })
                    .collect(),
            })
            .collect();
        let mentions = c
            .mentions
            .into_iter()
            .map(|m| Mention {
                id: m.id,
                doc_id: c.doc_id.clone(),
                sentence_index: m.sentence,
                span: (m.span[0], m.span[1]),
                head_index: m.head,
                wd_chain: m.wd_chain,
                cd_chain: m.cd_chain,
            })
            .collect();
        Document {
            doc_id: c.doc_id,
            topic: c.topic,
            sub_topic: c.sub_topic,
            sentences,
            mentions,
        }
    }
}

impl From<&Document> for CanonicalDocument {
    fn from(d: &Document) -> Self {
        CanonicalDocument {
            doc_id: d.doc_id.clone(),
            topic: d.topic,
            sub_topic: d.sub_topic,
            sentences: d
                .sentences
                .iter()
                .map(|s| {
                    s.tokens
                        .iter()
                        .map(|t| CanonicalToken {
                            text: t.text.clone(),
                            lemma: t.lemma.clone(),
                            pos: t.pos.clone(),
                        })
                        .collect()
                })
                .collect(),
            mentions: d
                .mentions
                .iter()
                .map(|m| CanonicalMention {
                    id: m.id.clone(),
                    sentence: m.sentence_index,
                    span: [m.span.0, m.span.1],
                    head: m.head_index,
                    wd_chain: m.wd_chain.clone(),
                    cd_chain: m.cd_chain.clone(),
                })
                .collect(),
        }
    }
}

/// Reads a canonical JSON-lines stream. Blank lines are skipped; an empty
/// stream is an empty corpus.
pub fn load_canonical<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut documents = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: CanonicalDocument = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        documents.push(Document::from(doc));
    }
    Corpus::new(documents)
}

pub fn load_canonical_path(path: &Path) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_canonical(BufReader::new(file))
}

pub fn write_canonical<W: Write>(corpus: &Corpus, mut writer: W) -> std::io::Result<()> {
    for doc in corpus.documents() {
        serde_json::to_writer(&mut writer, &CanonicalDocument::from(doc))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn write_canonical_path(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_canonical(corpus, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}
